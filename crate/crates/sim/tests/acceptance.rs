//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//!     cargo test -p v2vcc-sim --test acceptance

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use v2vcc_core::metrics::{summarize, Stats};
use v2vcc_core::ndn::{Action, Data, FaceId, Forwarder, ForwarderConfig, Interest, Nonce};
use v2vcc_core::protocol::feasibility::feasible_meeting;
use v2vcc_core::protocol::negotiation::{negotiate, NegotiationPolicy};
use v2vcc_core::protocol::select::{select_supplier, Criterion};
use v2vcc_core::protocol::Behavior;
use v2vcc_core::sim::rng_stream;
use v2vcc_core::{parse_name, Ident, Name, Phase, Point, Price, ScenarioParams, SimTime, SupplierProfile, World};
use v2vcc_sim::{parse_scenario, run_experiment, write_outputs, MetricsTable, ScenarioConfig};

const BASELINE_BEST_MS: f64 = 125.0;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn scenario(text: &str) -> ScenarioConfig {
    parse_scenario(text).expect("acceptance scenario parses")
}

fn optimal(consumers: usize) -> ScenarioConfig {
    scenario(&format!(
        "seed = 1\nruns = 10\nconsumers = {consumers}\nsuppliers = {}\nratio_check = true\n\
         loss = 0.0\nspeed_mph = 0\ndiscovery = 1\ntimeout_ms = 30\n",
        consumers / 3
    ))
}

fn run(cfg: &ScenarioConfig) -> MetricsTable {
    run_experiment(cfg).expect("experiment runs")
}

fn phase_stats(table: &MetricsTable) -> Vec<(&'static str, Stats)> {
    summarize(&table.rows).into_iter().map(|(p, s)| (p, s.expect("completed sessions"))).collect()
}

fn mean_total(table: &MetricsTable) -> f64 {
    let t = table.completed_totals();
    t.iter().sum::<f64>() / t.len() as f64
}

fn criterion_1() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (delay, expect) in [(25, 125.0), (50, 250.0), (100, 500.0)] {
        let t = run(&scenario(&format!("mode = ip\nseed = 3\nruns = 10\ndelay_ms = {delay}\nerror_rate = 0\nclients = 5\n")));
        for v in t.completed_totals() {
            worst = worst.max((v - expect).abs());
        }
        detail.push(format!("{delay} ms → {:.4}", mean_total(&t)));
    }
    verdict(worst < 0.1, format!("{} (max deviation {worst:.4} ms)", detail.join(", ")))
}

fn criterion_2(table: &MetricsTable, elapsed: Duration) -> Verdict {
    let mean = mean_total(table);
    let reduction = 1.0 - mean / BASELINE_BEST_MS;
    verdict(
        table.all_done() && mean < 10.0 && reduction >= 0.92 && elapsed < Duration::from_secs(10),
        format!(
            "21 consumers, 10 runs: mean {mean:.4} ms, reduction {:.2}%, {} sessions all done: {}, {:.2?}",
            reduction * 100.0,
            table.rows.len(),
            table.all_done(),
            elapsed
        ),
    )
}

fn criterion_3(table: &MetricsTable) -> Verdict {
    let stats = phase_stats(table);
    let phases = &stats[..5];
    let mut ok = phases.iter().all(|(_, s)| s.mean < 2.0);
    let mut detail: Vec<String> = phases.iter().map(|(p, s)| format!("{p} {:.3}", s.mean)).collect();
    for n in 1..=3 {
        let cfg = scenario(&format!("seed = 1\nruns = 10\nconsumers = {n}\nsuppliers = 1\n"));
        let small = phase_stats(&run(&cfg));
        let (d, v) = (small[0].1.mean, small[1].1.mean);
        ok &= d < 0.5 && v < 0.5;
        detail.push(format!("N={n}: disc {d:.3} ver {v:.3}"));
    }
    verdict(ok, detail.join(", "))
}

fn criterion_4() -> Verdict {
    let ns = [6, 9, 12, 15, 18, 21];
    let means: Vec<f64> = ns.iter().map(|&n| mean_total(&run(&optimal(n)))).collect();
    let base = means[0];
    let plateau = means.iter().all(|&m| m <= 2.0 * base);
    let monotone = means.windows(2).all(|w| w[1] >= 0.9 * w[0]);
    let series: Vec<String> = ns.iter().zip(&means).map(|(n, m)| format!("{n}:{m:.4}")).collect();
    verdict(plateau && monotone, format!("means {} (plateau {plateau}, monotone±10% {monotone})", series.join(" ")))
}

fn criterion_5(table: &MetricsTable) -> Verdict {
    let mean = mean_total(table);
    let failed = table.rows.iter().filter(|r| r.outcome != "done").count();
    verdict(
        failed == 0 && mean <= BASELINE_BEST_MS,
        format!("20% loss, 10 runs: {failed} of {} sessions failed, mean {mean:.3} ms", table.rows.len()),
    )
}

fn discovery_name() -> Name {
    "/FastCharging/Discovery/-/0.12/20/-/840/900/0".parse().unwrap()
}

fn aggregation_holds() -> (bool, String) {
    let mut ok = true;
    for k in 1..=21u64 {
        let mut f = Forwarder::new(ForwarderConfig::default());
        let sent: usize = (0..k)
            .map(|i| {
                let out = f.on_interest(Interest::new(discovery_name(), Nonce(i), 30.0), FaceId(10 + i as u32), SimTime::ZERO);
                out.iter().filter(|a| matches!(a, Action::ForwardInterest { .. })).count()
            })
            .sum();
        ok &= sent == 1;
    }
    for k in 1..=21 {
        let p = ScenarioParams { n_consumers: k, n_suppliers: 1, supplier_energy: 20.0 * k as f64, ..Default::default() };
        let out = World::new(&p, 5).run();
        let reqs =
            out.producer_requests.iter().filter(|(_, n)| parse_name(n).unwrap().phase() == Phase::Discovery).count();
        ok &= reqs == 1;
    }
    (ok, "K=1..21 forwarder and producer".into())
}

fn cache_hits_hold() -> (bool, String) {
    let mut f = Forwarder::new(ForwarderConfig::default());
    f.on_interest(Interest::new(discovery_name(), Nonce(0), 30.0), FaceId(10), SimTime::ZERO);
    let data = Data::signed(discovery_name().child("S0").unwrap(), "x", Ident::new("S0").unwrap(), 1000.0);
    f.on_data(data, FaceId(1), SimTime::from_ms(0.2));
    let before = f.stats().forwarded;
    let hits = (1..=20)
        .filter(|&i| {
            f.on_interest(Interest::new(discovery_name(), Nonce(i), 30.0), FaceId(11), SimTime::from_ms(0.3))
                .contains(&Action::CacheHit)
        })
        .count();
    let mut ok = hits == 20 && f.stats().forwarded == before;

    let p = ScenarioParams { n_consumers: 0, n_suppliers: 0, ..Default::default() };
    let mut w = World::empty(&p, 8);
    w.add_supplier(Point::new(500.0, 500.0), Behavior::Honest);
    for i in 0..4 {
        w.add_consumer(Point::new(505.0, 500.0 + i as f64), 0.2 + 0.19 * i as f64);
    }
    let out = w.run();
    let producer_discoveries =
        out.producer_requests.iter().filter(|(_, n)| parse_name(n).unwrap().phase() == Phase::Discovery).count();
    ok &= producer_discoveries == 1;
    (ok, format!("{hits}/20 forwarder hits, {producer_discoveries} producer discovery request(s) for 4 staggered consumers"))
}

fn criterion_6(tables: &[&MetricsTable]) -> Verdict {
    let start = Instant::now();
    let (agg, agg_d) = aggregation_holds();
    let (cache, cache_d) = cache_hits_hold();

    let (mut delivered, mut verified) = (0, 0);
    for t in tables {
        for r in &t.runs {
            delivered += r.audit.data_delivered;
            verified += r.audit.data_verified;
        }
    }
    let sig = delivered > 0 && delivered == verified;

    let cfg = scenario("seed = 99\nruns = 4\nconsumers = 21\nsuppliers = 7\nloss = 0.2\n");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_outputs(&run(&cfg), d.path()).unwrap();
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("sessions.csv")).unwrap();
    let det = read(&dirs[0]) == read(&dirs[1]);

    let elapsed = start.elapsed();
    verdict(
        agg && cache && sig && det && elapsed < Duration::from_secs(30),
        format!(
            "aggregation {agg} ({agg_d}); cache {cache} ({cache_d}); signatures {verified}/{delivered}; \
             byte-identical sessions.csv {det}; {elapsed:.2?}"
        ),
    )
}

fn random_profile(rng: &mut impl Rng, i: usize) -> SupplierProfile {
    SupplierProfile {
        pid: Ident::new(format!("P{i}")).unwrap(),
        location: Point::new(rng.random_range(0..50) as f64 * 20.0, rng.random_range(0..50) as f64 * 20.0),
        price_per_kwh: Price::from_micros(rng.random_range(8..13) * 10_000),
        available_energy: 50.0,
        reputation: rng.random_range(0..=10) as f64,
        free_slots: vec![],
        soc: 40.0,
        consumption_rate: 0.2,
        reserved_until: None,
    }
}

fn criterion_7() -> Verdict {
    let mut rng = rng_stream(2024, 7);
    let mut select_bad = 0;
    let mut nego_bad = 0;
    let mut feas_bad = 0;
    let all = [Criterion::Price, Criterion::Distance, Criterion::Reputation];
    for _ in 0..1000 {
        let n = rng.random_range(1..=15);
        let cands: Vec<_> = (0..n).map(|i| random_profile(&mut rng, i)).collect();
        let from = Point::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0));
        let mut order = all;
        for i in (1..3).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let crit = &order[..rng.random_range(1..=3)];
        let mut sorted: Vec<&SupplierProfile> = cands.iter().collect();
        sorted.sort_by(|a, b| {
            crit.iter()
                .map(|c| match c {
                    Criterion::Price => a.price_per_kwh.cmp(&b.price_per_kwh),
                    Criterion::Distance => {
                        let da = (a.location.x - from.x).hypot(a.location.y - from.y);
                        let db = (b.location.x - from.x).hypot(b.location.y - from.y);
                        da.total_cmp(&db)
                    }
                    Criterion::Reputation => b.reputation.total_cmp(&a.reputation),
                })
                .find(|o| o.is_ne())
                .unwrap_or_else(|| a.pid.cmp(&b.pid))
        });
        if select_supplier(&cands, from, crit) != Some(&sorted[0].pid) {
            select_bad += 1;
        }
    }
    for _ in 0..1000 {
        let policy = NegotiationPolicy {
            opening_discount: rng.random_range(0.0..0.5),
            concession_step: rng.random_range(0.001..0.3),
            floor_fraction: rng.random_range(0.5..=1.0),
            max_rounds: rng.random_range(1..10),
        };
        let list = Price::from_micros(rng.random_range(50_000..500_000));
        let ceiling = list.scaled(rng.random_range(0.5..1.5));
        let r = negotiate(list, rng.random_range(1.0..60.0), rng.random_range(0.0..60.0), ceiling, &policy);
        let in_bounds = r.agreed.is_none_or(|o| o.price_per_kwh >= policy.floor(list) && o.price_per_kwh <= list);
        if r.rounds > policy.max_rounds || !in_bounds {
            nego_bad += 1;
        }
    }
    for _ in 0..1000 {
        let soc = rng.random_range(0.0..60.0);
        let rate = rng.random_range(0.05..0.4);
        let reserve = rng.random_range(0.0..5.0);
        let a = Point::new(rng.random_range(0.0..20_000.0), rng.random_range(0.0..20_000.0));
        let b = Point::new(rng.random_range(0.0..20_000.0), rng.random_range(0.0..20_000.0));
        let km = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt() / 1000.0;
        let expected = km * rate <= soc - reserve;
        if feasible_meeting(soc, rate, a, b, reserve) != expected {
            feas_bad += 1;
        }
    }
    verdict(
        select_bad + nego_bad + feas_bad == 0,
        format!("mismatches over 1000 each: select {select_bad}, negotiation {nego_bad}, feasibility {feas_bad}"),
    )
}

fn main() -> ExitCode {
    let t = Instant::now();
    let optimal_table = run(&optimal(21));
    let optimal_elapsed = t.elapsed();
    let lossy = run(&scenario("seed = 1\nruns = 10\nconsumers = 21\nsuppliers = 7\nratio_check = true\nloss = 0.2\n"));

    let results = [
        ("IP baseline exactness", criterion_1()),
        ("optimal total and reduction", criterion_2(&optimal_table, optimal_elapsed)),
        ("per-phase bounds", criterion_3(&optimal_table)),
        ("scaling plateau", criterion_4()),
        ("loss resilience", criterion_5(&lossy)),
        ("forwarding-plane properties", criterion_6(&[&optimal_table, &lossy])),
        ("protocol-logic oracles", criterion_7()),
    ];
    let mut failed = 0;
    for (i, (title, v)) in results.iter().enumerate() {
        println!("{} criterion {} ({title}): {}", if v.ok { "PASS" } else { "FAIL" }, i + 1, v.detail);
        failed += usize::from(!v.ok);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
