use std::fmt;

use crate::error::Result;
use crate::pwl::ExtReal;

/// `slope * γ + intercept`. An infinite intercept makes the function a
/// constant infinity, so its slope is always stored as zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFn {
    slope: f64,
    intercept: ExtReal,
}

impl LinearFn {
    pub fn new(slope: f64, intercept: impl Into<ExtReal>) -> Self {
        let intercept = intercept.into();
        assert!(slope.is_finite(), "slope must be finite");
        let slope = if intercept.is_finite() { slope } else { 0.0 };
        LinearFn { slope, intercept }
    }

    pub fn constant(v: impl Into<ExtReal>) -> Self {
        LinearFn::new(0.0, v)
    }

    #[inline]
    pub fn slope(&self) -> f64 {
        self.slope
    }

    #[inline]
    pub fn intercept(&self) -> ExtReal {
        self.intercept
    }

    pub fn is_finite(&self) -> bool {
        self.intercept.is_finite()
    }

    pub fn is_constant(&self) -> bool {
        self.slope == 0.0
    }

    #[inline]
    pub fn eval(&self, r: f64) -> ExtReal {
        if self.intercept.is_finite() {
            ExtReal::from(self.slope * r + self.intercept.value())
        } else {
            self.intercept
        }
    }

    pub fn checked_add(&self, other: &LinearFn) -> Result<LinearFn> {
        let intercept = self.intercept.checked_add(other.intercept)?;
        Ok(LinearFn::new(self.slope + other.slope, intercept))
    }

    pub fn checked_sub(&self, other: &LinearFn) -> Result<LinearFn> {
        let intercept = self.intercept.checked_sub(other.intercept)?;
        Ok(LinearFn::new(self.slope - other.slope, intercept))
    }

    pub fn scale(&self, c: f64) -> LinearFn {
        LinearFn::new(self.slope * c, self.intercept.scale(c))
    }

    /// Coefficient-wise equality up to a relative tolerance.
    pub fn approx_eq(&self, other: &LinearFn, tol: f64) -> bool {
        close(self.slope, other.slope, tol) && close(self.intercept.value(), other.intercept.value(), tol)
    }
}

pub(crate) fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

impl fmt::Display for LinearFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slope == 0.0 {
            write!(f, "{}", self.intercept)
        } else {
            write!(f, "{}γ + {}", self.slope, self.intercept)
        }
    }
}
