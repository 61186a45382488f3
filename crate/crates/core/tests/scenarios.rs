//! Whole-protocol runs through the simulator.

use v2vcc_core::ndn::EventKind;
use v2vcc_core::protocol::{Behavior, SessionPhase};
use v2vcc_core::{parse_name, Phase, Point, RunOutput, ScenarioParams, World};

fn params(consumers: usize, suppliers: usize) -> ScenarioParams {
    ScenarioParams { n_consumers: consumers, n_suppliers: suppliers, ..Default::default() }
}

fn requests_in(out: &RunOutput, phase: Phase) -> usize {
    out.producer_requests.iter().filter(|(_, n)| parse_name(n).unwrap().phase() == phase).count()
}

fn all_done(out: &RunOutput) -> bool {
    out.sessions.iter().all(|s| s.phase == SessionPhase::Done)
}

fn discovery_ms(out: &RunOutput) -> f64 {
    out.sessions[0].timings.duration_ms(Phase::Discovery).unwrap()
}

#[test]
fn simultaneous_consumers_reach_producer_once_per_shared_name() {
    for k in 1..=21 {
        let p = ScenarioParams { supplier_energy: 20.0 * k as f64, ..params(k, 1) };
        let out = World::new(&p, 11).run();
        assert!(all_done(&out), "k={k}");
        assert_eq!(requests_in(&out, Phase::Discovery), 1, "k={k}");
        assert_eq!(requests_in(&out, Phase::Verification), 1, "k={k}");
        // per-consumer phases carry the cid and are never shared
        assert_eq!(requests_in(&out, Phase::Confirmation), k, "k={k}");
    }
}

#[test]
fn late_consumers_are_served_from_cache() {
    let p = params(0, 0);
    let mut w = World::empty(&p, 3);
    let site = Point::new(500.0, 500.0);
    w.add_supplier(site, Behavior::Honest);
    // discovery names carry a millisecond timestamp, so later requests
    // share the name only within the same millisecond
    for i in 0..5 {
        w.add_consumer(Point::new(510.0, 500.0 + i as f64), 0.19 * i as f64);
    }
    let out = w.run();
    assert!(all_done(&out));
    assert_eq!(requests_in(&out, Phase::Discovery), 1);
    let hits = out.events.iter().filter(|e| e.kind == EventKind::CacheHit).count();
    assert!(hits >= 4, "{hits} cache hits");
    assert!(out.audit.worst_cache_staleness_ms <= 0.0);
}

#[test]
fn lost_first_interest_is_retransmitted_after_timeout() {
    let p = params(1, 1);
    let mut w = World::new(&p, 5);
    w.channel_mut().script_losses([true]);
    let out = w.run();
    assert!(all_done(&out));
    let d = discovery_ms(&out);
    assert!(d > 30.0 && d < 60.0, "discovery took {d} ms");
    let timeouts: Vec<_> = out.events.iter().filter(|e| e.kind == EventKind::Timeout).collect();
    assert_eq!(timeouts.len(), 1);
    assert_eq!(timeouts[0].time.as_ms(), 30.0);
}

#[test]
fn dead_channel_gives_up_after_max_retx() {
    let mut p = params(1, 1);
    p.channel.loss_rate = 1.0;
    p.max_retx = 2;
    let out = World::new(&p, 5).run();
    assert_eq!(out.sessions[0].outcome_label(), "discovery_failed");
    let t: Vec<f64> =
        out.events.iter().filter(|e| e.kind == EventKind::Timeout).map(|e| e.time.as_ms()).collect();
    assert_eq!(t, [30.0, 60.0, 90.0]);
}

#[test]
fn lost_confirmation_is_retried_and_recorded_once() {
    let p = params(1, 1);
    let mut w = World::new(&p, 9);
    // discovery, verification, two negotiation rounds, coordination: ten
    // receptions; the eleventh is the confirmation interest
    w.channel_mut().script_losses([false; 10].into_iter().chain([true]));
    let out = w.run();
    assert!(all_done(&out));
    let c = out.sessions[0].timings.duration_ms(Phase::Confirmation).unwrap();
    assert!(c > 30.0 && c < 31.0, "confirmation took {c} ms");
    assert_eq!(out.supplier_records.len(), 1);
    assert_eq!(out.audit.record_mismatches, 0);
}

#[test]
fn no_supplier_means_discovery_failure() {
    let out = World::new(&params(2, 0), 1).run();
    assert!(out.sessions.iter().all(|s| s.outcome_label() == "discovery_failed"));
}

#[test]
fn misreported_price_is_caught_and_bypassed() {
    // four buyers fit into the honest supplier's 100 kWh
    let mut p = params(4, 2);
    p.misreporting = 1;
    let out = World::new(&p, 21).run();
    assert!(all_done(&out));
    // S00 advertises a discount it will not honour; nobody buys from it
    assert!(out.sessions.iter().all(|s| s.selected.as_ref().unwrap().as_str() == "S01"));
    assert_eq!(out.audit.record_mismatches, 0);
}

#[test]
fn tampered_verification_is_rejected() {
    let mut p = params(3, 2);
    p.tampering = 1;
    let out = World::new(&p, 4).run();
    assert!(all_done(&out));
    assert!(out.sessions.iter().all(|s| s.selected.as_ref().unwrap().as_str() == "S01"));
    assert!(out.audit.data_verified < out.audit.data_delivered);
}

#[test]
fn honest_runs_pass_every_audit() {
    for (loss, speed) in [(0.0, 0.0), (0.2, 0.0), (0.0, 70.0), (0.2, 30.0)] {
        let mut p = params(12, 4);
        p.channel.loss_rate = loss;
        p.speed_mph = speed;
        let out = World::new(&p, 77).run();
        let a = &out.audit;
        assert!(a.clock_monotone);
        assert_eq!(a.data_verified, a.data_delivered, "loss={loss} speed={speed}");
        assert_eq!(a.duplicate_forwards, 0);
        assert!(!a.reservation_overdraw);
        assert_eq!(a.record_mismatches, 0);
        assert_eq!(a.infeasible_meetings, 0);
        assert_eq!(a.phase_order_violations, 0);
        assert!(a.worst_cache_staleness_ms <= 0.0);
    }
}

#[test]
fn same_seed_same_run() {
    let mut p = params(9, 3);
    p.channel.loss_rate = 0.2;
    let a = World::new(&p, 42).run();
    let b = World::new(&p, 42).run();
    assert_eq!(a.sessions, b.sessions);
    assert_eq!(a.events, b.events);
    let c = World::new(&p, 43).run();
    assert_ne!(a.events, c.events);
}

#[test]
fn combined_phases_skip_the_verification_exchange() {
    let mut p = params(3, 1);
    p.combine_phases = true;
    let out = World::new(&p, 2).run();
    assert!(all_done(&out));
    assert_eq!(requests_in(&out, Phase::Verification), 0);
    let split = World::new(&params(3, 1), 2).run();
    let total = |o: &RunOutput| o.sessions[0].timings.total_ms().unwrap();
    assert!(total(&out) < total(&split));
}

