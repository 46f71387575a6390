//! The interface between optimization problems and the trainer, plus the
//! per-example steps of one coordinate update: building the γ-parameterized
//! problem and turning its optimal-value function into regret.

use std::fmt;

use crate::error::{Error, Result};
use crate::framework::{Sense, Solved};
use crate::model::{Coefficients, FeatureMatrix};
use crate::pwl::{Interval, LinearFn, Piece, PwlFunction};

/// One unknown parameter as seen during a coordinate update: its estimate
/// as a function of γ and its true value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaParam {
    pub line: LinearFn,
    pub truth: f64,
}

/// An optimization problem whose parameters are unknown at solving time.
pub trait Problem: Sync {
    type Solution: Clone + Send + fmt::Debug;

    fn sense(&self) -> Sense;

    /// Number of unknown parameters.
    fn param_count(&self) -> usize;

    /// Whether estimated parameters must be nonnegative.
    fn nonnegative(&self) -> bool {
        true
    }

    fn solve(&self, theta: &[f64]) -> Result<Solved<Self::Solution>>;

    /// Objective of `solution` under parameters `theta`.
    fn objective(&self, solution: &Self::Solution, theta: &[f64]) -> Result<f64>;

    fn is_feasible(&self, _solution: &Self::Solution) -> bool {
        true
    }

    /// Optimal-value function over `domain` for parameters linear in γ.
    /// Payloads hold the true objective of the selected decision.
    fn relearn(&self, params: &[GammaParam], domain: Interval) -> Result<PwlFunction>;
}

pub(crate) fn check_len<T>(theta: &[T], t: usize) -> Result<()> {
    if theta.len() != t {
        return Err(Error::Dimension(format!(
            "expected {t} parameters, got {}",
            theta.len()
        )));
    }
    Ok(())
}

/// The affine map `θ̂(γ) = aγ + b` obtained by freeing coordinate `k` of α.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamLine {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ParamLine {
    pub fn new(features: &FeatureMatrix, alpha: &Coefficients, k: usize) -> Result<Self> {
        if k >= alpha.len() || alpha.len() != features.cols() {
            return Err(Error::Dimension(format!(
                "coordinate {k} of {} coefficients, {} feature columns",
                alpha.len(),
                features.cols()
            )));
        }
        let mut rest = alpha.to_vec();
        rest[k] = 0.0;
        let a = (0..features.rows()).map(|i| features.get(i, k)).collect();
        let b = features.mul_vec(&rest)?;
        Ok(ParamLine { a, b })
    }

    pub fn at(&self, gamma: f64) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(a, b)| a * gamma + b).collect()
    }

    /// The set of γ where every estimate is nonnegative, or `None` when that
    /// set is empty or a single point.
    pub fn nonnegative_domain(&self) -> Option<Interval> {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (&a, &b) in self.a.iter().zip(&self.b) {
            if a > 0.0 {
                lo = lo.max(-b / a);
            } else if a < 0.0 {
                hi = hi.min(-b / a);
            } else if b < 0.0 {
                return None;
            }
        }
        Interval::new(lo, hi).ok()
    }
}

/// Builds the γ-parameterized problem for coordinate `k` (0-based) and its
/// admissible domain. `None` means the example has no admissible γ and must
/// be skipped for this coordinate.
pub fn construct<P: Problem + ?Sized>(
    problem: &P,
    features: &FeatureMatrix,
    truth: &[f64],
    alpha: &Coefficients,
    k: usize,
) -> Result<Option<(Vec<GammaParam>, Interval)>> {
    check_len(truth, problem.param_count())?;
    let line = ParamLine::new(features, alpha, k)?;
    let domain = if problem.nonnegative() {
        match line.nonnegative_domain() {
            Some(d) => d,
            None => return Ok(None),
        }
    } else {
        Interval::REAL_LINE
    };
    let params = line
        .a
        .iter()
        .zip(&line.b)
        .zip(truth)
        .map(|((&a, &b), &truth)| GammaParam {
            line: LinearFn::new(a, b),
            truth,
        })
        .collect();
    Ok(Some((params, domain)))
}

/// Turns an optimal-value function into a piecewise-constant regret
/// function on the whole real line. Inside `domain` each piece scores the
/// regret of its decision; outside, and wherever the decision has no finite
/// true objective, the score is `big_m`.
pub fn evaluate_regret(
    e: &PwlFunction,
    true_opt: f64,
    domain: Interval,
    sense: Sense,
    big_m: f64,
) -> Result<PwlFunction> {
    let e = e.restrict(domain)?;
    let penalty = |iv| Piece::new(iv, LinearFn::constant(big_m), big_m);
    let mut pieces = Vec::with_capacity(e.len() + 2);
    if domain.lo() > f64::NEG_INFINITY {
        pieces.push(penalty(Interval::new(f64::NEG_INFINITY, domain.lo())?));
    }
    for p in e.pieces() {
        let v = sense.sign() * (p.payload.value() - true_opt);
        let v = if v.is_finite() { v.max(0.0) } else { big_m };
        pieces.push(Piece::new(p.interval, LinearFn::constant(v), v));
    }
    if domain.hi() < f64::INFINITY {
        pieces.push(penalty(Interval::new(domain.hi(), f64::INFINITY)?));
    }
    PwlFunction::from_pieces(pieces)
}

/// Regret of acting on `theta_hat` when the parameters are really `theta`.
pub fn regret<P: Problem + ?Sized>(problem: &P, theta_hat: &[f64], theta: &[f64]) -> Result<f64> {
    check_len(theta_hat, problem.param_count())?;
    check_len(theta, problem.param_count())?;
    let est = problem.solve(theta_hat)?;
    let opt = problem.solve(theta)?;
    if !problem.is_feasible(&est.solution) || !problem.is_feasible(&opt.solution) {
        return Err(Error::Infeasible("no feasible solution".into()));
    }
    let achieved = problem.objective(&est.solution, theta)?;
    let best = problem.objective(&opt.solution, theta)?;
    Ok((problem.sense().sign() * (achieved - best)).max(0.0))
}

/// True objective at the decision chosen for `theta_hat`, and the true
/// optimum.
pub fn true_and_achieved<P: Problem + ?Sized>(
    problem: &P,
    theta_hat: &[f64],
    theta: &[f64],
) -> Result<(f64, f64)> {
    let est = problem.solve(theta_hat)?;
    let achieved = problem.objective(&est.solution, theta)?;
    let opt = problem.solve(theta)?;
    Ok((opt.objective.value(), achieved))
}
