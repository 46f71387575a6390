//! Generic recursive solving and its learning counterpart.
//!
//! A solver is described by a node type: a base-case test, the base result,
//! an extraction step computing branching data, a branch step producing
//! subproblems from that data, and a commutative reduction over the results.
//! The learning form replaces every number that depends on the unknown
//! parameters by a [`PwlFunction`] of the free coefficient γ and lets the
//! branching data vary with γ.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pwl::{CombineOp, ExtReal, Interval, PiecewiseInfo, PwlFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// `+1` for minimization, `-1` for maximization.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }

    /// Whether `candidate` is strictly better than `incumbent`.
    pub fn better(self, candidate: ExtReal, incumbent: ExtReal) -> bool {
        match self {
            Sense::Minimize => candidate < incumbent,
            Sense::Maximize => candidate > incumbent,
        }
    }

    pub fn reduce_op(self) -> CombineOp {
        match self {
            Sense::Minimize => CombineOp::Min,
            Sense::Maximize => CombineOp::Max,
        }
    }
}

/// A decision together with its objective value.
#[derive(Clone, Debug, PartialEq)]
pub struct Solved<S> {
    pub solution: S,
    pub objective: ExtReal,
}

/// A subproblem of a recursive solver with known parameters.
pub trait SolveNode: Sized {
    type Solution;
    type Info;

    fn sense(&self) -> Sense;
    fn is_base(&self) -> bool;
    fn base_result(&self) -> Solved<Self::Solution>;
    fn extract(&self) -> Self::Info;
    fn branch(&self, info: &Self::Info) -> Vec<Self>;
}

/// Solves `node` by recursion. Reduction keeps the earliest branch among
/// equally good results.
pub fn resolve<N: SolveNode>(node: &N) -> Result<Solved<N::Solution>> {
    if node.is_base() {
        return Ok(node.base_result());
    }
    let info = node.extract();
    let sense = node.sense();
    let mut best: Option<Solved<N::Solution>> = None;
    for sub in node.branch(&info) {
        let r = resolve(&sub)?;
        best = match best {
            Some(b) if !sense.better(r.objective, b.objective) => Some(b),
            _ => Some(r),
        };
    }
    best.ok_or(Error::EmptyBranch)
}

/// A subproblem whose unknown parameters are linear functions of γ.
pub trait LearnNode: Sized {
    type Info;

    fn reduce_op(&self) -> CombineOp;
    fn is_base(&self) -> bool;
    fn base_result(&self, domain: Interval) -> Result<PwlFunction>;
    fn extract(&self, domain: Interval) -> Result<PiecewiseInfo<Self::Info>>;
    fn branch(&self, info: &Self::Info) -> Vec<Self>;
}

/// Computes the optimal-value function of `node` over `domain`.
///
/// For every interval of the extracted branching data the subproblems are
/// learned on that interval and combined with the reduction operator; the
/// per-interval results are then joined.
pub fn relearn<N: LearnNode>(node: &N, domain: Interval) -> Result<PwlFunction> {
    if node.is_base() {
        return node.base_result(domain);
    }
    let info = node.extract(domain)?;
    let op = node.reduce_op();
    let mut parts = Vec::with_capacity(info.len());
    for (iv, t) in info.iter() {
        let mut acc: Option<PwlFunction> = None;
        for sub in node.branch(t) {
            let r = relearn(&sub, *iv)?;
            acc = Some(match acc {
                None => r,
                Some(a) => a.combine(&r, op)?,
            });
        }
        parts.push(acc.ok_or(Error::EmptyBranch)?.simplify());
    }
    if parts.len() == 1 {
        return Ok(parts.pop().unwrap());
    }
    Ok(PwlFunction::concat(parts)?.simplify())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwl::LinearFn;

    /// Picks the best of `values` by binary branching over the index range.
    struct Pick<'a> {
        values: &'a [f64],
        lo: usize,
        hi: usize,
    }

    impl SolveNode for Pick<'_> {
        type Solution = usize;
        type Info = usize;

        fn sense(&self) -> Sense {
            Sense::Maximize
        }
        fn is_base(&self) -> bool {
            self.hi - self.lo == 1
        }
        fn base_result(&self) -> Solved<usize> {
            Solved {
                solution: self.lo,
                objective: self.values[self.lo].into(),
            }
        }
        fn extract(&self) -> usize {
            (self.lo + self.hi) / 2
        }
        fn branch(&self, mid: &usize) -> Vec<Self> {
            vec![
                Pick {
                    values: self.values,
                    lo: self.lo,
                    hi: *mid,
                },
                Pick {
                    values: self.values,
                    lo: *mid,
                    hi: self.hi,
                },
            ]
        }
    }

    #[test]
    fn resolve_takes_first_of_ties() {
        let v = [1.0, 4.0, 2.0, 4.0];
        let r = resolve(&Pick {
            values: &v,
            lo: 0,
            hi: 4,
        })
        .unwrap();
        assert_eq!(r.solution, 1);
        assert_eq!(r.objective.value(), 4.0);
    }

    /// max over lines `slope * γ + intercept`, one branch per line.
    struct Lines(Vec<(f64, f64)>);

    impl LearnNode for Lines {
        type Info = ();

        fn reduce_op(&self) -> CombineOp {
            CombineOp::Max
        }
        fn is_base(&self) -> bool {
            self.0.len() == 1
        }
        fn base_result(&self, domain: Interval) -> Result<PwlFunction> {
            let (s, b) = self.0[0];
            Ok(PwlFunction::linear(domain, LinearFn::new(s, b), b))
        }
        fn extract(&self, domain: Interval) -> Result<PiecewiseInfo<()>> {
            Ok(PiecewiseInfo::single(domain, ()))
        }
        fn branch(&self, _: &()) -> Vec<Self> {
            self.0.iter().map(|&l| Lines(vec![l])).collect()
        }
    }

    #[test]
    fn relearn_builds_upper_envelope() {
        let d = Interval::new(-10.0, 10.0).unwrap();
        let f = relearn(&Lines(vec![(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)]), d).unwrap();
        assert_eq!(f.len(), 3);
        for g in [-5.0f64, 0.0, 0.5, 7.0] {
            let want = g.abs().max(1.0);
            assert!((f.evaluate(g).unwrap().0.value() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_branch_is_an_error() {
        let d = Interval::new(0.0, 1.0).unwrap();
        assert!(matches!(relearn(&Lines(vec![]), d), Err(Error::EmptyBranch)));
    }
}
