use std::fmt;

use crate::error::{Error, Result};

/// A nonempty interval `[lo, hi]` of the real line; either end may be infinite.
///
/// Inside a partition the interval is read as half-open `[lo, hi)`, except
/// for the last piece which also owns `hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub(crate) lo: f64,
    pub(crate) hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Closed membership test.
    pub fn contains(&self, r: f64) -> bool {
        self.lo <= r && r <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }

    /// A point strictly inside the interval: the midpoint when bounded, the
    /// finite end moved one unit inwards when half-bounded, and `0` for the
    /// whole line.
    pub fn interior_point(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let mid = self.lo + 0.5 * (self.hi - self.lo);
                if mid > self.lo && mid < self.hi {
                    mid
                } else {
                    self.lo
                }
            }
            (true, false) => self.lo + 1.0,
            (false, true) => self.hi - 1.0,
            (false, false) => 0.0,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
