//! Piecewise-linear functions of the free coefficient γ.
//!
//! Every piece carries two things: an estimated objective that is linear in γ
//! and a constant payload, the true-parameter objective of the decision the
//! piece stands for. Addition acts on both. Minimum and maximum choose a
//! winner by estimated value and copy the winner's payload, so after any
//! chain of operations the payload still describes the decision that the
//! estimate selected.

use std::fmt;

use crate::error::{Error, Result};
use crate::pwl::{ExtReal, Interval, LinearFn};

/// Relative tolerance under which two slopes are treated as parallel.
pub const PARALLEL_TOL: f64 = 1e-12;

/// Relative tolerance used when merging adjacent pieces.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub interval: Interval,
    pub est: LinearFn,
    pub payload: ExtReal,
}

impl Piece {
    pub fn new(interval: Interval, est: LinearFn, payload: impl Into<ExtReal>) -> Self {
        Piece {
            interval,
            est,
            payload: payload.into(),
        }
    }
}

/// Pointwise binary operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Add,
    Sub,
    Min,
    Max,
}

/// Where a piece of a combined function came from: indices into the pieces
/// of the left and/or right operand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Left(usize),
    Right(usize),
    Both(usize, usize),
}

/// A function on an interval domain, linear on each piece of a finite
/// partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PwlFunction {
    domain: Interval,
    pieces: Vec<Piece>,
}

impl PwlFunction {
    /// Builds a function from pieces that must be sorted, nonempty and
    /// contiguous. The domain is the union of the pieces.
    pub fn from_pieces(pieces: Vec<Piece>) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::Partition("no pieces".into()))?;
        for w in pieces.windows(2) {
            if w[0].interval.hi != w[1].interval.lo {
                return Err(Error::Partition(format!(
                    "gap or overlap between {} and {}",
                    w[0].interval, w[1].interval
                )));
            }
        }
        let domain = Interval::new(first.interval.lo, pieces.last().unwrap().interval.hi)?;
        Ok(PwlFunction { domain, pieces })
    }

    pub fn constant(v: impl Into<ExtReal>, domain: Interval, payload: impl Into<ExtReal>) -> Self {
        PwlFunction::linear(domain, LinearFn::constant(v), payload)
    }

    pub fn linear(domain: Interval, est: LinearFn, payload: impl Into<ExtReal>) -> Self {
        PwlFunction {
            domain,
            pieces: vec![Piece::new(domain, est, payload)],
        }
    }

    pub fn zero(domain: Interval) -> Self {
        PwlFunction::constant(0.0, domain, 0.0)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Interior breakpoints, in increasing order.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.pieces.iter().skip(1).map(|p| p.interval.lo)
    }

    /// Checks that the pieces are sorted, nonempty and tile the domain.
    pub fn is_valid(&self) -> bool {
        !self.pieces.is_empty()
            && self.pieces[0].interval.lo == self.domain.lo
            && self.pieces.last().unwrap().interval.hi == self.domain.hi
            && self.pieces.iter().all(|p| p.interval.lo < p.interval.hi)
            && self
                .pieces
                .windows(2)
                .all(|w| w[0].interval.hi == w[1].interval.lo)
    }

    /// Index of the piece owning `r` under the half-open convention.
    pub fn piece_index(&self, r: f64) -> Result<usize> {
        if r.is_nan() || !self.domain.contains(r) {
            return Err(Error::OutOfDomain {
                point: r,
                domain: self.domain,
            });
        }
        let idx = self.pieces.partition_point(|p| p.interval.lo <= r);
        Ok(idx.saturating_sub(1))
    }

    /// Estimated value and payload at `r`.
    pub fn evaluate(&self, r: f64) -> Result<(ExtReal, ExtReal)> {
        let p = &self.pieces[self.piece_index(r)?];
        Ok((p.est.eval(r), p.payload))
    }

    pub fn combine(&self, other: &PwlFunction, op: CombineOp) -> Result<PwlFunction> {
        Ok(self.combine_traced(other, op)?.0)
    }

    /// Like [`combine`](Self::combine), also reporting for every result
    /// piece which operand pieces it was built from. For `Min` and `Max` the
    /// origin is the winning operand; ties go to `self`.
    pub fn combine_traced(&self, other: &PwlFunction, op: CombineOp) -> Result<(PwlFunction, Vec<Origin>)> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(self.domain, other.domain));
        }
        let (f, g) = (&self.pieces, &other.pieces);
        let mut out = Vec::with_capacity(f.len() + g.len());
        let mut origins = Vec::with_capacity(f.len() + g.len());
        let (mut i, mut j) = (0, 0);
        let mut lo = self.domain.lo;
        while i < f.len() && j < g.len() {
            let hi = f[i].interval.hi.min(g[j].interval.hi);
            let seg = Interval { lo, hi };
            match op {
                CombineOp::Add => {
                    out.push(Piece {
                        interval: seg,
                        est: f[i].est.checked_add(&g[j].est)?,
                        payload: f[i].payload.checked_add(g[j].payload)?,
                    });
                    origins.push(Origin::Both(i, j));
                }
                CombineOp::Sub => {
                    out.push(Piece {
                        interval: seg,
                        est: f[i].est.checked_sub(&g[j].est)?,
                        payload: f[i].payload.checked_sub(g[j].payload)?,
                    });
                    origins.push(Origin::Both(i, j));
                }
                CombineOp::Min | CombineOp::Max => {
                    for (sub, right) in extremum_split(seg, &f[i].est, &g[j].est, op) {
                        let src = if right { &g[j] } else { &f[i] };
                        out.push(Piece {
                            interval: sub,
                            est: src.est,
                            payload: src.payload,
                        });
                        origins.push(if right { Origin::Right(j) } else { Origin::Left(i) });
                    }
                }
            }
            if f[i].interval.hi == hi {
                i += 1;
            }
            if g[j].interval.hi == hi {
                j += 1;
            }
            lo = hi;
        }
        let h = PwlFunction {
            domain: self.domain,
            pieces: out,
        };
        debug_assert!(h.is_valid());
        Ok((h, origins))
    }

    /// Adds a linear function (and a constant payload) to every piece.
    pub fn add_linear(&self, line: &LinearFn, payload: ExtReal) -> Result<PwlFunction> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                Ok(Piece {
                    interval: p.interval,
                    est: p.est.checked_add(line)?,
                    payload: p.payload.checked_add(payload)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PwlFunction {
            domain: self.domain,
            pieces,
        })
    }

    pub fn scale(&self, c: f64) -> PwlFunction {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                interval: p.interval,
                est: p.est.scale(c),
                payload: p.payload.scale(c),
            })
            .collect();
        PwlFunction {
            domain: self.domain,
            pieces,
        }
    }

    /// Restricts the function to `interval ∩ domain`.
    pub fn restrict(&self, interval: Interval) -> Result<PwlFunction> {
        let dom = self
            .domain
            .intersect(&interval)
            .ok_or(Error::EmptyIntersection(self.domain, interval))?;
        if dom == self.domain {
            return Ok(self.clone());
        }
        let pieces = self
            .pieces
            .iter()
            .filter_map(|p| {
                p.interval.intersect(&dom).map(|iv| Piece {
                    interval: iv,
                    est: p.est,
                    payload: p.payload,
                })
            })
            .collect();
        Ok(PwlFunction { domain: dom, pieces })
    }

    /// Merges neighbouring pieces with equal payloads whose estimates agree to
    /// within [`MERGE_TOL`].
    pub fn simplify(&self) -> PwlFunction {
        let mut pieces: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            match pieces.last_mut() {
                Some(last) if same_value(last, p) => last.interval.hi = p.interval.hi,
                _ => pieces.push(*p),
            }
        }
        PwlFunction {
            domain: self.domain,
            pieces,
        }
    }

    /// Joins functions whose domains are adjacent, in order.
    pub fn concat(parts: Vec<PwlFunction>) -> Result<PwlFunction> {
        if parts.is_empty() {
            return Err(Error::Partition("nothing to concatenate".into()));
        }
        for w in parts.windows(2) {
            if w[0].domain.hi != w[1].domain.lo {
                return Err(Error::Partition(format!(
                    "domains {} and {} are not adjacent",
                    w[0].domain, w[1].domain
                )));
            }
        }
        let domain = Interval {
            lo: parts[0].domain.lo,
            hi: parts.last().unwrap().domain.hi,
        };
        let pieces = parts.into_iter().flat_map(|p| p.pieces).collect();
        Ok(PwlFunction { domain, pieces })
    }

    /// Minimizer of a piecewise-constant function: an interior point of the
    /// leftmost piece attaining the minimum, together with that minimum.
    pub fn argmin_piecewise(&self) -> Result<(f64, ExtReal)> {
        if self
            .pieces
            .iter()
            .any(|p| p.est.is_finite() && !p.est.is_constant())
        {
            return Err(Error::NotPiecewiseConstant);
        }
        let best = self.argmin_piece()?;
        let p = &self.pieces[best];
        Ok((p.interval.interior_point(), p.est.intercept()))
    }

    /// Index of the leftmost piece with the smallest constant value.
    pub(crate) fn argmin_piece(&self) -> Result<usize> {
        let mut best = 0;
        for (k, p) in self.pieces.iter().enumerate().skip(1) {
            if p.est.intercept() < self.pieces[best].est.intercept() {
                best = k;
            }
        }
        if self.pieces[best].est.intercept() == ExtReal::INFINITY {
            return Err(Error::NoFinitePiece);
        }
        Ok(best)
    }
}

// Payloads must match exactly: merging two different decisions with nearly
// equal true objectives would silently change regret values downstream.
fn same_value(a: &Piece, b: &Piece) -> bool {
    a.payload == b.payload && a.est.approx_eq(&b.est, MERGE_TOL)
}

/// Splits `seg` into at most two sub-intervals labelled with whether the
/// right operand wins the extremum there. Exact ties go left.
fn extremum_split(
    seg: Interval,
    left: &LinearFn,
    right: &LinearFn,
    op: CombineOp,
) -> impl Iterator<Item = (Interval, bool)> {
    let right_wins_at = |r: f64| {
        let (l, rv) = (left.eval(r), right.eval(r));
        match op {
            CombineOp::Min => rv < l,
            _ => rv > l,
        }
    };
    let parallel = !left.is_finite()
        || !right.is_finite()
        || (right.slope() - left.slope()).abs()
            <= PARALLEL_TOL * left.slope().abs().max(right.slope().abs()).max(1.0);

    let mut parts = [(seg, false), (seg, false)];
    let mut n = 1;
    if parallel {
        parts[0].1 = right_wins_at(seg.interior_point());
    } else {
        // Right wins where sign * (right - left)(γ) < 0, i.e. ds * γ < db.
        let sign = if op == CombineOp::Min { 1.0 } else { -1.0 };
        let ds = sign * (right.slope() - left.slope());
        let db = sign * (left.intercept().value() - right.intercept().value());
        let x = db / ds;
        if x <= seg.lo {
            parts[0].1 = ds < 0.0;
        } else if x >= seg.hi {
            parts[0].1 = ds > 0.0;
        } else {
            parts[0] = (Interval { lo: seg.lo, hi: x }, ds > 0.0);
            parts[1] = (Interval { lo: x, hi: seg.hi }, ds < 0.0);
            n = 2;
        }
    }
    parts.into_iter().take(n)
}

impl fmt::Display for PwlFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, p) in self.pieces.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} -> {} ({})", p.interval, p.est, p.payload)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn pw(pieces: &[(f64, f64, f64, f64, f64)]) -> PwlFunction {
        PwlFunction::from_pieces(
            pieces
                .iter()
                .map(|&(lo, hi, s, b, pay)| Piece::new(iv(lo, hi), LinearFn::new(s, b), pay))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn evaluate_single_piece() {
        let f = PwlFunction::linear(Interval::REAL_LINE, LinearFn::new(2.0, 1.0), 7.0);
        let (v, p) = f.evaluate(3.0).unwrap();
        assert_eq!(v.value(), 7.0);
        assert_eq!(p.value(), 7.0);
    }

    #[test]
    fn evaluate_breakpoint_goes_right() {
        let f = pw(&[(0.0, 4.0, 1.0, 0.0, 1.0), (4.0, 10.0, 0.0, 4.0, 2.0)]);
        let (v, p) = f.evaluate(4.0).unwrap();
        assert_eq!(v.value(), 4.0);
        assert_eq!(p.value(), 2.0);
        // closed last piece
        assert_eq!(f.evaluate(10.0).unwrap().1.value(), 2.0);
        assert!(f.evaluate(10.5).is_err());
        assert!(f.evaluate(-0.1).is_err());
    }

    #[test]
    fn evaluate_piece_lookup() {
        let f = pw(&[(0.0, 2.0, 0.0, 5.0, 5.0), (2.0, 9.0, 0.0, 1.0, 1.0)]);
        let (v, p) = f.evaluate(1.999).unwrap();
        assert_eq!((v.value(), p.value()), (5.0, 5.0));
    }

    #[test]
    fn add_linear_functions() {
        let d = iv(0.0, 10.0);
        let f = PwlFunction::linear(d, LinearFn::new(1.0, 1.0), 0.0);
        let g = PwlFunction::linear(d, LinearFn::new(2.0, -1.0), 0.0);
        let h = f.combine(&g, CombineOp::Add).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.pieces()[0].est, LinearFn::new(3.0, 0.0));
    }

    #[test]
    fn max_with_single_crossing() {
        let d = iv(0.0, 10.0);
        let f = PwlFunction::linear(d, LinearFn::new(1.0, 0.0), 9.0);
        let g = PwlFunction::constant(4.0, d, 7.0);
        let h = f.combine(&g, CombineOp::Max).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.pieces()[0].interval, iv(0.0, 4.0));
        assert_eq!(h.pieces()[0].est, LinearFn::constant(4.0));
        assert_eq!(h.pieces()[0].payload.value(), 7.0);
        assert_eq!(h.pieces()[1].interval, iv(4.0, 10.0));
        assert_eq!(h.pieces()[1].est, LinearFn::new(1.0, 0.0));
        assert_eq!(h.pieces()[1].payload.value(), 9.0);
    }

    #[test]
    fn ties_go_left() {
        let d = iv(0.0, 1.0);
        let f = PwlFunction::constant(3.0, d, 1.0);
        let g = PwlFunction::constant(3.0, d, 2.0);
        let (h, o) = f.combine_traced(&g, CombineOp::Min).unwrap();
        assert_eq!(h.pieces()[0].payload.value(), 1.0);
        assert_eq!(o, vec![Origin::Left(0)]);
        let (h, _) = g.combine_traced(&f, CombineOp::Max).unwrap();
        assert_eq!(h.pieces()[0].payload.value(), 2.0);
    }

    #[test]
    fn min_against_infinity() {
        let d = iv(0.0, 1.0);
        let inf = PwlFunction::constant(ExtReal::INFINITY, d, ExtReal::INFINITY);
        let f = PwlFunction::linear(d, LinearFn::new(-3.0, 2.0), 5.0);
        assert_eq!(inf.combine(&f, CombineOp::Min).unwrap(), f);
        assert_eq!(f.combine(&inf, CombineOp::Min).unwrap(), f);
        assert!(inf.combine(&inf.scale(-1.0), CombineOp::Add).is_err());
    }

    #[test]
    fn domain_mismatch_is_an_error() {
        let f = PwlFunction::zero(iv(0.0, 1.0));
        let g = PwlFunction::zero(iv(0.0, 2.0));
        assert!(matches!(
            f.combine(&g, CombineOp::Add),
            Err(Error::DomainMismatch(..))
        ));
    }

    #[test]
    fn scaling() {
        let f = PwlFunction::linear(Interval::REAL_LINE, LinearFn::new(2.0, 1.0), 3.0);
        let g = f.scale(3.0);
        assert_eq!(g.pieces()[0].est, LinearFn::new(6.0, 3.0));
        assert_eq!(g.pieces()[0].payload.value(), 9.0);
        let z = f.scale(0.0);
        assert_eq!(z.evaluate(12.0).unwrap(), (ExtReal::ZERO, ExtReal::ZERO));
        assert_eq!(f.scale(-1.0).scale(-1.0), f);
    }

    #[test]
    fn restriction() {
        let f = pw(&[(0.0, 4.0, 1.0, 0.0, 1.0), (4.0, 10.0, 0.0, 4.0, 2.0)]);
        let r = f.restrict(iv(3.0, 6.0)).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.pieces()[0].interval, iv(3.0, 4.0));
        assert_eq!(r.pieces()[1].interval, iv(4.0, 6.0));
        assert_eq!(f.restrict(f.domain()).unwrap(), f);
        let single = f.restrict(iv(2.0, 3.0)).unwrap();
        assert_eq!(single.len(), 1);
        assert!(f.restrict(iv(10.0, 12.0)).is_err());
    }

    #[test]
    fn constants() {
        let z = PwlFunction::zero(Interval::REAL_LINE);
        assert_eq!(z.evaluate(-1e6).unwrap().0, ExtReal::ZERO);
        let c = PwlFunction::constant(5.0, iv(2.0, 3.0), 5.0);
        assert_eq!(c.evaluate(2.5).unwrap().0.value(), 5.0);
        let inf = PwlFunction::constant(ExtReal::INFINITY, iv(0.0, 1.0), ExtReal::INFINITY);
        assert_eq!(inf.evaluate(0.5).unwrap().0, ExtReal::INFINITY);
    }

    #[test]
    fn argmin_examples() {
        let f = pw(&[
            (0.0, 2.0, 0.0, 5.0, 0.0),
            (2.0, 7.0, 0.0, 1.0, 0.0),
            (7.0, 10.0, 0.0, 3.0, 0.0),
        ]);
        assert_eq!(f.argmin_piecewise().unwrap(), (4.5, ExtReal::from(1.0)));

        let f = pw(&[(0.0, 2.0, 0.0, 1.0, 0.0), (2.0, 7.0, 0.0, 1.0, 0.0)]);
        assert_eq!(f.argmin_piecewise().unwrap(), (1.0, ExtReal::from(1.0)));

        let f = pw(&[(f64::NEG_INFINITY, 0.0, 0.0, 2.0, 0.0), (0.0, 5.0, 0.0, 7.0, 0.0)]);
        assert_eq!(f.argmin_piecewise().unwrap(), (-1.0, ExtReal::from(2.0)));
    }

    #[test]
    fn argmin_errors() {
        let inf = PwlFunction::constant(ExtReal::INFINITY, iv(0.0, 1.0), 0.0);
        assert!(matches!(inf.argmin_piecewise(), Err(Error::NoFinitePiece)));
        let lin = PwlFunction::linear(iv(0.0, 1.0), LinearFn::new(1.0, 0.0), 0.0);
        assert!(matches!(lin.argmin_piecewise(), Err(Error::NotPiecewiseConstant)));
    }

    #[test]
    fn simplify_merges_only_identical_neighbours() {
        let f = pw(&[(0.0, 2.0, 1.0, 1.0, 3.0), (2.0, 5.0, 1.0, 1.0, 3.0)]);
        let s = f.simplify();
        assert_eq!(s.len(), 1);
        assert_eq!(s.pieces()[0].interval, iv(0.0, 5.0));

        let g = pw(&[(0.0, 2.0, 1.0, 1.0, 3.0), (2.0, 5.0, 0.0, 1.0, 3.0)]);
        assert_eq!(g.simplify(), g);

        let h = pw(&[(0.0, 2.0, 1.0, 1.0, 3.0), (2.0, 5.0, 1.0, 1.0, 4.0)]);
        assert_eq!(h.simplify().len(), 2);
    }

    #[test]
    fn concat_requires_adjacent_domains() {
        let a = PwlFunction::zero(iv(0.0, 1.0));
        let b = PwlFunction::constant(1.0, iv(1.0, 2.0), 1.0);
        let c = PwlFunction::concat(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(c.domain(), iv(0.0, 2.0));
        assert!(c.is_valid());
        assert!(PwlFunction::concat(vec![b, a]).is_err());
    }

    #[test]
    fn from_pieces_rejects_gaps() {
        let r = PwlFunction::from_pieces(vec![
            Piece::new(iv(0.0, 1.0), LinearFn::constant(0.0), 0.0),
            Piece::new(iv(1.5, 2.0), LinearFn::constant(0.0), 0.0),
        ]);
        assert!(r.is_err());
    }
}
