//! Shared broadcast medium: serialization plus propagation delay, range
//! cut-off and independent per-receiver loss.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::geo::Point;

use super::SimTime;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub bandwidth_bps: f64,
    pub loss_rate: f64,
    /// m/s
    pub propagation_speed: f64,
    /// Meters.
    pub comm_range: f64,
    pub header_overhead: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            bandwidth_bps: 24_000_000.0,
            loss_rate: 0.0,
            propagation_speed: 3.0e8,
            comm_range: 300.0,
            header_overhead: 0,
        }
    }
}

impl ChannelConfig {
    pub fn is_valid(&self) -> bool {
        self.bandwidth_bps > 0.0
            && (0.0..=1.0).contains(&self.loss_rate)
            && self.propagation_speed > 0.0
            && self.comm_range >= 0.0
    }

    /// Time to put `packet_bytes` on the air, ms.
    pub fn serialization_ms(&self, packet_bytes: usize) -> f64 {
        (packet_bytes + self.header_overhead) as f64 * 8.0 / self.bandwidth_bps * 1000.0
    }

    pub fn propagation_ms(&self, distance_m: f64) -> f64 {
        distance_m / self.propagation_speed * 1000.0
    }
}

/// One in-range receiver of a broadcast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub to: usize,
    pub at: SimTime,
    pub lost: bool,
}

pub struct Channel {
    config: ChannelConfig,
    rng: ChaCha8Rng,
    /// Forced loss decisions consumed before the RNG is consulted.
    script: VecDeque<bool>,
}

impl Channel {
    pub fn new(config: ChannelConfig, rng: ChaCha8Rng) -> Self {
        assert!(config.is_valid(), "invalid channel config");
        Self { config, rng, script: VecDeque::new() }
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.config
    }

    /// Queues explicit loss outcomes (`true` = lost) for the next
    /// in-range receptions, in order.
    pub fn script_losses(&mut self, outcomes: impl IntoIterator<Item = bool>) {
        self.script.extend(outcomes);
    }

    fn lost(&mut self) -> bool {
        if let Some(forced) = self.script.pop_front() {
            return forced;
        }
        let p = self.config.loss_rate;
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.rng.random_bool(p)
        }
    }

    /// Fans a transmission that starts at `tx_start` out to every receiver
    /// within range. Receivers are visited in the order given, which keeps
    /// loss draws reproducible.
    pub fn broadcast(
        &mut self,
        sender: usize,
        sender_pos: Point,
        receivers: impl IntoIterator<Item = (usize, Point)>,
        packet_bytes: usize,
        tx_start: SimTime,
    ) -> Vec<Delivery> {
        let ser = self.config.serialization_ms(packet_bytes);
        let mut out = Vec::new();
        for (to, pos) in receivers {
            if to == sender {
                continue;
            }
            let d = sender_pos.distance(&pos);
            if d > self.config.comm_range {
                continue;
            }
            let at = tx_start + (ser + self.config.propagation_ms(d));
            let lost = self.lost();
            out.push(Delivery { to, at, lost });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng_stream;
    use alloc::vec;

    fn channel(loss: f64) -> Channel {
        Channel::new(ChannelConfig { loss_rate: loss, ..Default::default() }, rng_stream(7, 0))
    }

    #[test]
    fn serialization_of_1500_bytes() {
        let mut ch = channel(0.0);
        let d = ch.broadcast(0, Point::new(0.0, 0.0), vec![(1, Point::new(0.0, 0.0))], 1500, SimTime::ZERO);
        assert_eq!(d.len(), 1);
        assert!((d[0].at.as_ms() - 0.5).abs() < 1e-12);
        assert!(!d[0].lost);
    }

    #[test]
    fn propagation_adds_distance_over_speed() {
        let mut ch = channel(0.0);
        let d = ch.broadcast(0, Point::new(0.0, 0.0), vec![(1, Point::new(300.0, 0.0))], 0, SimTime::ZERO);
        assert!((d[0].at.as_ms() - 0.001).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_and_self_excluded() {
        let mut ch = channel(0.0);
        let rx = vec![(0, Point::new(0.0, 0.0)), (1, Point::new(301.0, 0.0)), (2, Point::new(0.0, 299.0))];
        let d = ch.broadcast(0, Point::new(0.0, 0.0), rx, 256, SimTime::ZERO);
        assert_eq!(d.iter().map(|d| d.to).collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn full_loss_drops_everything() {
        let mut ch = channel(1.0);
        let rx = (1..10).map(|i| (i, Point::new(i as f64, 0.0)));
        assert!(ch.broadcast(0, Point::default(), rx, 256, SimTime::ZERO).iter().all(|d| d.lost));
    }

    #[test]
    fn empirical_loss_rate_converges() {
        let mut ch = channel(0.2);
        let trials = 10_000;
        let lost = (0..trials)
            .filter(|_| ch.broadcast(0, Point::default(), [(1, Point::default())], 256, SimTime::ZERO)[0].lost)
            .count();
        let frac = lost as f64 / trials as f64;
        assert!((frac - 0.2).abs() <= 0.01, "loss fraction {frac}");
    }

    #[test]
    fn scripted_losses_take_priority() {
        let mut ch = channel(0.0);
        ch.script_losses([true, false]);
        let rx = [(1, Point::default()), (2, Point::default()), (3, Point::default())];
        let d = ch.broadcast(0, Point::default(), rx, 256, SimTime::ZERO);
        assert_eq!(d.iter().map(|d| d.lost).collect::<Vec<_>>(), vec![true, false, false]);
    }
}
