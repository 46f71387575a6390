//! Reals extended with `+inf` and `-inf`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real number or one of the two infinities. Never NaN.
///
/// Infinities absorb finite values under addition and are neutral for the
/// opposite extremum (`min(x, +inf) = x`). Adding opposite infinities is an
/// error rather than NaN.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(0.0);
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);
    pub const NEG_INFINITY: ExtReal = ExtReal(f64::NEG_INFINITY);

    /// Wraps `v`, rejecting NaN.
    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::UndefinedSum)
        } else {
            Ok(ExtReal(v))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn checked_add(self, other: ExtReal) -> Result<ExtReal> {
        let s = self.0 + other.0;
        if s.is_nan() {
            Err(Error::UndefinedSum)
        } else {
            Ok(ExtReal(s))
        }
    }

    pub fn checked_sub(self, other: ExtReal) -> Result<ExtReal> {
        self.checked_add(-other)
    }

    /// Multiplies by a finite constant; `inf * 0` is taken to be `0`.
    pub fn scale(self, c: f64) -> ExtReal {
        debug_assert!(c.is_finite());
        if c == 0.0 {
            ExtReal::ZERO
        } else {
            ExtReal(self.0 * c)
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<f64> for ExtReal {
    /// # Panics
    /// On NaN input.
    fn from(v: f64) -> Self {
        assert!(!v.is_nan(), "ExtReal cannot hold NaN");
        ExtReal(v)
    }
}

impl From<ExtReal> for f64 {
    fn from(v: ExtReal) -> f64 {
        v.0
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal(-self.0)
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("ExtReal is never NaN")
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            write!(f, "+inf")
        } else if self.0 == f64::NEG_INFINITY {
            write!(f, "-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_finite_values() {
        let x = ExtReal::from(3.5);
        assert_eq!(x.checked_add(ExtReal::INFINITY).unwrap(), ExtReal::INFINITY);
        assert_eq!(x.min(ExtReal::INFINITY), x);
        assert_eq!(x.max(ExtReal::INFINITY), ExtReal::INFINITY);
        assert_eq!(x.max(ExtReal::NEG_INFINITY), x);
        assert_eq!(x.min(ExtReal::NEG_INFINITY), ExtReal::NEG_INFINITY);
    }

    #[test]
    fn opposite_infinities_do_not_add() {
        assert!(matches!(
            ExtReal::INFINITY.checked_add(ExtReal::NEG_INFINITY),
            Err(Error::UndefinedSum)
        ));
        assert!(ExtReal::INFINITY.checked_sub(ExtReal::INFINITY).is_err());
        assert!(ExtReal::new(f64::NAN).is_err());
    }

    #[test]
    fn zero_scaling_of_infinity_is_zero() {
        assert_eq!(ExtReal::INFINITY.scale(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::INFINITY.scale(-2.0), ExtReal::NEG_INFINITY);
    }
}
