use crate::error::Error;

/// A stream element: a d-dimensional point with its position in the stream.
///
/// `arrival_index` is 0-based and must be strictly increasing along a stream.
/// `timestamp` is only required by time-based sliding windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
    pub arrival_index: u64,
    pub timestamp: Option<u64>,
}

impl Point {
    pub fn new(coords: Vec<f64>, arrival_index: u64) -> Self {
        Self { coords, arrival_index, timestamp: None }
    }

    pub fn with_timestamp(coords: Vec<f64>, arrival_index: u64, timestamp: u64) -> Self {
        Self { coords, arrival_index, timestamp: Some(timestamp) }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Squared Euclidean distance to another point.
    pub fn dist_sq(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.coords.len(), other.coords.len());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Sliding-window descriptor. The width is counted in stream items
/// (`Sequence`) or in time units (`Time`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Sequence { width: u64 },
    Time { width: u64 },
}

impl Window {
    pub fn sequence(width: u64) -> Result<Self, Error> {
        if width == 0 {
            return Err(Error::Config("window width must be positive"));
        }
        Ok(Self::Sequence { width })
    }

    pub fn time(width: u64) -> Result<Self, Error> {
        if width == 0 {
            return Err(Error::Config("window width must be positive"));
        }
        Ok(Self::Time { width })
    }

    pub fn width(&self) -> u64 {
        match self {
            Self::Sequence { width } | Self::Time { width } => *width,
        }
    }

    /// True when `q` has fallen out of the window ending at `now`.
    ///
    /// A point exactly at the window boundary counts as expired: the window
    /// covers the last `width` items (resp. time units) ending at `now`,
    /// inclusive.
    pub fn expired(&self, q: &Point, now: &Point) -> bool {
        self.expired_at(q, now.arrival_index, now.timestamp)
    }

    /// Expiry check against an explicit stream position.
    pub fn expired_at(&self, q: &Point, now_index: u64, now_timestamp: Option<u64>) -> bool {
        match self {
            Self::Sequence { width } => {
                now_index >= *width && q.arrival_index <= now_index - width
            }
            Self::Time { width } => {
                let (qt, nt) = (
                    q.timestamp.expect("time window requires timestamps"),
                    now_timestamp.expect("time window requires timestamps"),
                );
                nt >= *width && qt <= nt - width
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_expiry_is_strict_last_w_items() {
        let w = Window::sequence(5).unwrap();
        let now = Point::new(vec![0.0], 7);
        // window covers indices 3..=7
        assert!(w.expired(&Point::new(vec![0.0], 2), &now));
        assert!(!w.expired(&Point::new(vec![0.0], 3), &now));
        assert!(!w.expired(&Point::new(vec![0.0], 7), &now));
    }

    #[test]
    fn time_expiry_allows_equal_timestamps() {
        let w = Window::time(10).unwrap();
        let now = Point::with_timestamp(vec![0.0], 5, 20);
        assert!(w.expired(&Point::with_timestamp(vec![0.0], 0, 10), &now));
        assert!(!w.expired(&Point::with_timestamp(vec![0.0], 1, 11), &now));
        assert!(!w.expired(&Point::with_timestamp(vec![0.0], 4, 20), &now));
    }

    #[test]
    fn zero_width_window_rejected() {
        assert!(Window::sequence(0).is_err());
        assert!(Window::time(0).is_err());
    }
}
