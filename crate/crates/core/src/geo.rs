use core::fmt;

/// Position in the flat simulation plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    /// Parses the `x,y` rendering produced by `Display`.
    pub fn parse(text: &str) -> Option<Point> {
        let (x, y) = text.split_once(',')?;
        let x: f64 = x.parse().ok()?;
        let y: f64 = y.parse().ok()?;
        if !x.is_finite() || !y.is_finite() {
            return None;
        }
        Some(Point::new(x, y))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn renders_and_parses() {
        let p = Point::new(-12.5, 3.0);
        assert_eq!(p.to_string(), "-12.5,3");
        assert_eq!(Point::parse("-12.5,3"), Some(p));
        assert_eq!(Point::parse("1;2"), None);
        assert_eq!(Point::parse("inf,2"), None);
    }

    #[test]
    fn distance_is_euclidean() {
        assert_eq!(Point::new(0.0, 0.0).distance(&Point::new(3.0, 4.0)), 5.0);
    }
}
