//! Constant-velocity movement inside a square arena with reflecting walls.

use crate::geo::Point;

pub const MPH_TO_MPS: f64 = 0.44704;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState {
    pub origin: Point,
    /// m/s
    pub velocity: Point,
    pub speed_mph: f64,
    /// Side of the arena, meters.
    pub arena: f64,
}

impl MobilityState {
    pub fn stationary(origin: Point, arena: f64) -> Self {
        Self { origin, velocity: Point::default(), speed_mph: 0.0, arena }
    }

    /// Moves at `speed_mph` along `heading` radians.
    pub fn moving(origin: Point, speed_mph: f64, heading: f64, arena: f64) -> Self {
        let v = speed_mph * MPH_TO_MPS;
        Self {
            origin,
            velocity: Point::new(v * libm::cos(heading), v * libm::sin(heading)),
            speed_mph,
            arena,
        }
    }

    pub fn speed_mps(&self) -> f64 {
        self.speed_mph * MPH_TO_MPS
    }

    /// Position `secs` seconds after the start of the run.
    pub fn position_at(&self, secs: f64) -> Point {
        Point::new(
            reflect(self.origin.x + self.velocity.x * secs, self.arena),
            reflect(self.origin.y + self.velocity.y * secs, self.arena),
        )
    }
}

/// Folds an unbounded coordinate back into `[0, side]`.
fn reflect(coord: f64, side: f64) -> f64 {
    if side <= 0.0 {
        return 0.0;
    }
    let period = 2.0 * side;
    let mut m = libm::fmod(coord, period);
    if m < 0.0 {
        m += period;
    }
    if m > side {
        period - m
    } else {
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_stays_put() {
        let m = MobilityState::stationary(Point::new(10.0, 20.0), 1000.0);
        assert_eq!(m.position_at(1e6), Point::new(10.0, 20.0));
    }

    #[test]
    fn ten_mph_along_x() {
        let m = MobilityState::moving(Point::new(100.0, 100.0), 10.0, 0.0, 1000.0);
        let p = m.position_at(1.0);
        assert!((p.x - 104.4704).abs() < 1e-9);
        assert!((p.y - 100.0).abs() < 1e-9);
    }

    #[test]
    fn reflects_at_boundary() {
        // 70 mph = 31.2928 m/s, starting 10 m from the wall heading into it.
        let m = MobilityState::moving(Point::new(990.0, 500.0), 70.0, 0.0, 1000.0);
        let p = m.position_at(1.0);
        assert!((p.x - (1000.0 - (31.2928 - 10.0))).abs() < 1e-9);
        // After a long time the position is still inside the arena.
        for t in [0.5, 17.0, 123.4, 9999.0] {
            let p = m.position_at(t);
            assert!((0.0..=1000.0).contains(&p.x) && (0.0..=1000.0).contains(&p.y));
        }
        // Heading the other way bounces off 0.
        let m = MobilityState::moving(Point::new(5.0, 500.0), 10.0, core::f64::consts::PI, 1000.0);
        assert!((m.position_at(2.0).x - (2.0 * 4.4704 - 5.0)).abs() < 1e-9);
    }
}
