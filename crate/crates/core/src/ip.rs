//! Central-coordinator baseline: a client opens a TCP-style connection to a
//! cloud coordinator and makes one request. Cost is 1.5 round trips of
//! handshake plus one request round trip, serialization of the segments,
//! and a retransmission penalty for every lost segment. Coordinator
//! processing time is not counted.

use alloc::vec::Vec;

use rand::Rng;

use crate::sim::rng_stream;

/// SYN, SYN-ACK, ACK, request, response (bytes on the wire).
pub const SEGMENT_BYTES: [usize; 5] = [40, 40, 40, 64, 64];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudConfig {
    pub one_way_delay_ms: f64,
    pub bandwidth_bps: f64,
    pub error_rate: f64,
    pub n_providers: usize,
    pub n_clients: usize,
    /// Providers push their state to the coordinator this often.
    pub update_period_ms: f64,
    pub update_bytes: usize,
}

impl Default for CloudConfig {
    fn default() -> Self {
        Self {
            one_way_delay_ms: 25.0,
            bandwidth_bps: 24_000_000.0,
            error_rate: 0.0005,
            n_providers: 1,
            n_clients: 1,
            update_period_ms: 1000.0,
            update_bytes: 256,
        }
    }
}

impl CloudConfig {
    pub fn is_valid(&self) -> bool {
        self.one_way_delay_ms > 0.0
            && self.bandwidth_bps > 0.0
            && (0.0..1.0).contains(&self.error_rate)
            && self.update_period_ms > 0.0
    }

    pub fn rtt_ms(&self) -> f64 {
        2.0 * self.one_way_delay_ms
    }

    /// Time to clock every segment of one exchange onto the link, ms.
    pub fn serialization_ms(&self) -> f64 {
        SEGMENT_BYTES.iter().sum::<usize>() as f64 * 8.0 / self.bandwidth_bps * 1000.0
    }

    /// Fraction of link capacity the providers' periodic updates use.
    pub fn update_load(&self) -> f64 {
        let bits_per_sec = self.n_providers as f64 * self.update_bytes as f64 * 8.0 * 1000.0 / self.update_period_ms;
        bits_per_sec / self.bandwidth_bps
    }
}

/// One client's request time, drawing segment losses from `rng`. A lost
/// segment costs two round trips and is resent until it gets through.
pub fn client_completion_time(cfg: &CloudConfig, rng: &mut impl Rng) -> f64 {
    let mut penalty = 0.0;
    if cfg.error_rate > 0.0 {
        for _ in SEGMENT_BYTES {
            while rng.random_bool(cfg.error_rate) {
                penalty += 2.0 * cfg.rtt_ms();
            }
        }
    }
    2.5 * cfg.rtt_ms() + cfg.serialization_ms() + penalty
}

/// Completion times for `n_runs` runs of `n_clients` clients each; run `r`
/// draws from seed `seed + r`, client `c` from stream `c + 1`.
pub fn run_baseline_experiment(cfg: &CloudConfig, n_runs: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..n_runs)
        .map(|r| {
            let run_seed = seed.wrapping_add(r as u64);
            (0..cfg.n_clients)
                .map(|c| client_completion_time(cfg, &mut rng_stream(run_seed, c as u64 + 1)))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lossless(d: f64) -> CloudConfig {
        CloudConfig { one_way_delay_ms: d, error_rate: 0.0, ..Default::default() }
    }

    #[test]
    fn lossless_base_cases() {
        let mut rng = rng_stream(1, 1);
        for (d, expected) in [(25.0, 125.0), (50.0, 250.0), (100.0, 500.0)] {
            let t = client_completion_time(&lossless(d), &mut rng);
            assert!(t - expected >= 0.0 && t - expected < 0.1, "{d}: {t}");
        }
    }

    #[test]
    fn serialization_term_is_small() {
        // 248 bytes at 24 Mb/s
        assert!((lossless(25.0).serialization_ms() - 248.0 * 8.0 / 24_000.0).abs() < 1e-12);
    }

    #[test]
    fn rare_loss_mean_near_base() {
        let cfg = CloudConfig::default();
        let runs = run_baseline_experiment(&cfg, 1000, 3);
        let all: Vec<f64> = runs.into_iter().flatten().collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        // expected penalty: 5 segments * 0.0005 * 100 ms ~= 0.25 ms
        assert!((125.0..=127.0).contains(&mean), "{mean}");
        assert!(all.iter().all(|t| *t >= 125.0));
    }

    #[test]
    fn updates_never_fill_the_link() {
        let cfg = CloudConfig { n_providers: 3, ..Default::default() };
        assert!(cfg.update_load() < 1e-3);
    }
}
