//! Minimum-cost vertex cover with unknown vertex costs, solved by deciding
//! one vertex per recursion level.

use crate::error::{Error, Result};
use crate::framework::{self, LearnNode, Sense, SolveNode, Solved};
use crate::problem::{check_len, GammaParam, Problem};
use crate::pwl::{CombineOp, ExtReal, Interval, LinearFn, PiecewiseInfo, PwlFunction};

/// An undirected graph; vertex costs are the unknown parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexCover {
    n: usize,
    edges: Vec<(usize, usize)>,
    /// Edge masks: bit `v` of `incident[e]` is set for both endpoints.
    incident: Vec<u64>,
    prune: bool,
}

/// Chosen vertices in increasing order.
pub type Cover = Vec<usize>;

fn members(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

impl VertexCover {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n > 64 {
            return Err(Error::InvalidInstance("at most 64 vertices are supported".into()));
        }
        let mut incident = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidInstance(format!("bad edge ({u},{v})")));
            }
            incident.push(1 << u | 1 << v);
        }
        Ok(VertexCover {
            n,
            edges,
            incident,
            prune: false,
        })
    }

    /// Cut branches as soon as an edge between two decided vertices is left
    /// uncovered. Changes running time only, never the result.
    pub fn with_pruning(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn covers(&self, chosen: u64) -> bool {
        self.incident.iter().all(|&e| e & chosen != 0)
    }

    /// Whether some edge with both endpoints at index `>= depth` (decided
    /// already) is uncovered.
    fn doomed(&self, depth: usize, chosen: u64) -> bool {
        let decided = if depth >= 64 { 0 } else { !((1u64 << depth) - 1) };
        self.incident.iter().any(|&e| e & decided == e && e & chosen == 0)
    }
}

/// A subproblem: vertices `0..depth` are undecided.
struct Node<'a, T> {
    graph: &'a VertexCover,
    costs: &'a [T],
    depth: usize,
    chosen: u64,
}

impl<T> Node<'_, T> {
    fn at_base(&self) -> bool {
        self.depth == 0 || (self.graph.prune && self.graph.doomed(self.depth, self.chosen))
    }

    fn infeasible(&self) -> bool {
        !self.graph.covers(self.chosen)
    }

    fn children(&self) -> Vec<Self> {
        let v = self.depth - 1;
        let child = |chosen| Node {
            graph: self.graph,
            costs: self.costs,
            depth: v,
            chosen,
        };
        vec![child(self.chosen), child(self.chosen | 1 << v)]
    }
}

impl SolveNode for Node<'_, f64> {
    type Solution = u64;
    type Info = ();

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn is_base(&self) -> bool {
        self.at_base()
    }

    fn base_result(&self) -> Solved<u64> {
        if self.infeasible() {
            return Solved {
                solution: self.chosen,
                objective: ExtReal::INFINITY,
            };
        }
        let total = members(self.chosen).map(|v| self.costs[v]).sum::<f64>();
        Solved {
            solution: self.chosen,
            objective: total.into(),
        }
    }

    fn extract(&self) {}

    fn branch(&self, _: &()) -> Vec<Self> {
        self.children()
    }
}

impl LearnNode for Node<'_, GammaParam> {
    type Info = ();

    fn reduce_op(&self) -> CombineOp {
        CombineOp::Min
    }

    fn is_base(&self) -> bool {
        self.at_base()
    }

    fn base_result(&self, domain: Interval) -> Result<PwlFunction> {
        if self.infeasible() {
            return Ok(PwlFunction::constant(
                ExtReal::INFINITY,
                domain,
                ExtReal::INFINITY,
            ));
        }
        let mut est = LinearFn::constant(0.0);
        let mut payload = 0.0;
        for v in members(self.chosen) {
            est = est.checked_add(&self.costs[v].line)?;
            payload += self.costs[v].truth;
        }
        Ok(PwlFunction::linear(domain, est, payload))
    }

    fn extract(&self, domain: Interval) -> Result<PiecewiseInfo<()>> {
        Ok(PiecewiseInfo::single(domain, ()))
    }

    fn branch(&self, _: &()) -> Vec<Self> {
        self.children()
    }
}

impl VertexCover {
    fn root<'a, T>(&'a self, costs: &'a [T]) -> Node<'a, T> {
        Node {
            graph: self,
            costs,
            depth: self.n,
            chosen: 0,
        }
    }
}

impl Problem for VertexCover {
    type Solution = Cover;

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn param_count(&self) -> usize {
        self.n
    }

    fn solve(&self, theta: &[f64]) -> Result<Solved<Cover>> {
        check_len(theta, self.n)?;
        let r = framework::resolve(&self.root(theta))?;
        Ok(Solved {
            solution: members(r.solution).collect(),
            objective: r.objective,
        })
    }

    fn objective(&self, cover: &Cover, theta: &[f64]) -> Result<f64> {
        check_len(theta, self.n)?;
        Ok(cover.iter().map(|&v| theta[v]).sum())
    }

    fn is_feasible(&self, cover: &Cover) -> bool {
        self.covers(cover.iter().fold(0, |m, &v| m | 1 << v))
    }

    fn relearn(&self, params: &[GammaParam], domain: Interval) -> Result<PwlFunction> {
        check_len(params, self.n)?;
        framework::relearn(&self.root(params), domain)
    }
}

/// Cheapest cover by checking every vertex subset; at most 16 vertices.
pub fn brute_mcvc(n: usize, edges: &[(usize, usize)], costs: &[f64]) -> Result<f64> {
    if n > 16 {
        return Err(Error::TooLarge(format!("{n} vertices")));
    }
    check_len(costs, n)?;
    let mut best = f64::INFINITY;
    for subset in 0u32..1 << n {
        let covered = edges
            .iter()
            .all(|&(u, v)| subset >> u & 1 == 1 || subset >> v & 1 == 1);
        if covered {
            let c: f64 = (0..n).filter(|&v| subset >> v & 1 == 1).map(|v| costs[v]).sum();
            best = best.min(c);
        }
    }
    Ok(best)
}
