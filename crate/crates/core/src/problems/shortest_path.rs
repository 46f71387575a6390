//! Shortest path with unknown edge costs, solved by Bellman-Ford run as a
//! chain of single-branch recursions (one relaxation round per level).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::framework::{self, LearnNode, Sense, SolveNode, Solved};
use crate::problem::{check_len, GammaParam, Problem};
use crate::pwl::{CombineOp, ExtReal, Interval, PiecewiseInfo, PwlFunction};

/// A directed graph with a source and a target; edge costs are the unknown
/// parameters, indexed like `edges`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortestPath {
    n: usize,
    edges: Vec<(usize, usize)>,
    source: usize,
    target: usize,
    in_edges: Vec<Vec<(usize, usize)>>,
}

/// Edge indices along the path, or `None` when the target is unreachable.
pub type Path = Option<Vec<usize>>;

impl ShortestPath {
    pub fn new(n: usize, edges: Vec<(usize, usize)>, source: usize, target: usize) -> Result<Self> {
        if source >= n || target >= n {
            return Err(Error::InvalidInstance(format!(
                "endpoints {source},{target} outside 0..{n}"
            )));
        }
        let in_edges = in_edge_lists(n, &edges)?;
        Ok(ShortestPath {
            n,
            edges,
            source,
            target,
            in_edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// One relaxation round: for every vertex `v` and every `u != v` in
    /// increasing order, `D'[v] = min(D'[v], D[u] + c(u, v))`, starting from
    /// `D'[v] = D[v]`.
    fn relax(&self, dist: &[(ExtReal, Arc<Vec<usize>>)], theta: &[f64]) -> Vec<(ExtReal, Arc<Vec<usize>>)> {
        let mut next = dist.to_vec();
        for (v, ins) in self.in_edges.iter().enumerate() {
            for &(u, e) in ins {
                let cand = dist[u]
                    .0
                    .checked_add(theta[e].into())
                    .unwrap_or(ExtReal::INFINITY);
                if cand < next[v].0 {
                    let mut p = dist[u].1.as_ref().clone();
                    p.push(e);
                    next[v] = (cand, Arc::new(p));
                }
            }
        }
        next
    }

    fn relax_pwl(&self, dist: &[PwlFunction], params: &[GammaParam]) -> Result<Vec<PwlFunction>> {
        let mut next = dist.to_vec();
        for (v, ins) in self.in_edges.iter().enumerate() {
            for &(u, e) in ins {
                let cand = dist[u].add_linear(&params[e].line, params[e].truth.into())?;
                next[v] = next[v].combine(&cand, CombineOp::Min)?;
            }
        }
        Ok(next)
    }

    fn initial<T: Clone>(&self, zero: T, inf: T) -> Vec<T> {
        let mut d = vec![inf; self.n];
        d[self.source] = zero;
        d
    }

    /// Distances from the source after every relaxation round, starting with
    /// the initial labels.
    pub fn distance_rounds(&self, theta: &[f64]) -> Result<Vec<Vec<ExtReal>>> {
        check_len(theta, self.edges.len())?;
        let empty = Arc::new(Vec::new());
        let mut d = self.initial((ExtReal::ZERO, empty.clone()), (ExtReal::INFINITY, empty));
        let mut rounds = vec![d.iter().map(|x| x.0).collect::<Vec<_>>()];
        for _ in 1..self.n {
            d = self.relax(&d, theta);
            rounds.push(d.iter().map(|x| x.0).collect());
        }
        Ok(rounds)
    }

    /// Final distance functions for every vertex.
    pub fn relearn_distances(&self, params: &[GammaParam], domain: Interval) -> Result<Vec<PwlFunction>> {
        check_len(params, self.edges.len())?;
        let mut d = self.initial(
            PwlFunction::zero(domain),
            PwlFunction::constant(ExtReal::INFINITY, domain, ExtReal::INFINITY),
        );
        for _ in 1..self.n {
            d = self
                .relax_pwl(&d, params)?
                .into_iter()
                .map(|f| f.simplify())
                .collect();
        }
        Ok(d)
    }
}

pub(crate) fn in_edge_lists(n: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<(usize, usize)>>> {
    let mut seen = vec![false; n * n];
    let mut ins = vec![Vec::new(); n];
    for (e, &(u, v)) in edges.iter().enumerate() {
        if u >= n || v >= n || u == v {
            return Err(Error::InvalidInstance(format!("bad edge ({u},{v})")));
        }
        if std::mem::replace(&mut seen[u * n + v], true) {
            return Err(Error::InvalidInstance(format!("duplicate edge ({u},{v})")));
        }
        ins[v].push((u, e));
    }
    for list in &mut ins {
        list.sort_unstable();
    }
    Ok(ins)
}

struct Node<'a, T: Labelled> {
    graph: &'a ShortestPath,
    params: &'a [T],
    dist: Vec<T::Label>,
    rounds_left: usize,
}

trait Labelled {
    type Label: Clone;
}

impl Labelled for f64 {
    type Label = (ExtReal, Arc<Vec<usize>>);
}

impl Labelled for GammaParam {
    type Label = PwlFunction;
}

impl SolveNode for Node<'_, f64> {
    type Solution = Path;
    type Info = Vec<(ExtReal, Arc<Vec<usize>>)>;

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn is_base(&self) -> bool {
        self.rounds_left == 0
    }

    fn base_result(&self) -> Solved<Path> {
        let (d, path) = &self.dist[self.graph.target];
        Solved {
            solution: d.is_finite().then(|| path.as_ref().clone()),
            objective: *d,
        }
    }

    fn extract(&self) -> Self::Info {
        self.graph.relax(&self.dist, self.params)
    }

    fn branch(&self, next: &Self::Info) -> Vec<Self> {
        vec![Node {
            graph: self.graph,
            params: self.params,
            dist: next.clone(),
            rounds_left: self.rounds_left - 1,
        }]
    }
}

impl LearnNode for Node<'_, GammaParam> {
    type Info = Vec<PwlFunction>;

    fn reduce_op(&self) -> CombineOp {
        CombineOp::Min
    }

    fn is_base(&self) -> bool {
        self.rounds_left == 0
    }

    fn base_result(&self, domain: Interval) -> Result<PwlFunction> {
        self.dist[self.graph.target].restrict(domain)
    }

    fn extract(&self, domain: Interval) -> Result<PiecewiseInfo<Vec<PwlFunction>>> {
        let next = self.graph.relax_pwl(&self.dist, self.params)?;
        let next = next.into_iter().map(|f| f.simplify()).collect();
        Ok(PiecewiseInfo::single(domain, next))
    }

    fn branch(&self, next: &Vec<PwlFunction>) -> Vec<Self> {
        vec![Node {
            graph: self.graph,
            params: self.params,
            dist: next.clone(),
            rounds_left: self.rounds_left - 1,
        }]
    }
}

impl Problem for ShortestPath {
    type Solution = Path;

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn param_count(&self) -> usize {
        self.edges.len()
    }

    fn solve(&self, theta: &[f64]) -> Result<Solved<Path>> {
        check_len(theta, self.edges.len())?;
        let empty = Arc::new(Vec::new());
        let node = Node {
            graph: self,
            params: theta,
            dist: self.initial((ExtReal::ZERO, empty.clone()), (ExtReal::INFINITY, empty)),
            rounds_left: self.n.saturating_sub(1),
        };
        framework::resolve(&node)
    }

    fn objective(&self, path: &Path, theta: &[f64]) -> Result<f64> {
        check_len(theta, self.edges.len())?;
        Ok(match path {
            Some(p) => p.iter().map(|&e| theta[e]).sum(),
            None => f64::INFINITY,
        })
    }

    fn is_feasible(&self, path: &Path) -> bool {
        path.is_some()
    }

    fn relearn(&self, params: &[GammaParam], domain: Interval) -> Result<PwlFunction> {
        check_len(params, self.edges.len())?;
        let node = Node {
            graph: self,
            params,
            dist: self.initial(
                PwlFunction::zero(domain),
                PwlFunction::constant(ExtReal::INFINITY, domain, ExtReal::INFINITY),
            ),
            rounds_left: self.n.saturating_sub(1),
        };
        framework::relearn(&node, domain)
    }
}

/// Shortest distance by enumerating all simple paths; at most 8 vertices.
pub fn brute_spp(
    n: usize,
    edges: &[(usize, usize)],
    costs: &[f64],
    source: usize,
    target: usize,
) -> Result<ExtReal> {
    if n > 8 {
        return Err(Error::TooLarge(format!("{n} vertices")));
    }
    check_len(costs, edges.len())?;
    if source == target {
        return Ok(ExtReal::ZERO);
    }
    fn dfs(
        v: usize,
        target: usize,
        visited: &mut Vec<bool>,
        acc: f64,
        edges: &[(usize, usize)],
        costs: &[f64],
        best: &mut f64,
    ) {
        if v == target {
            *best = best.min(acc);
            return;
        }
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a == v && !visited[b] {
                visited[b] = true;
                dfs(b, target, visited, acc + costs[e], edges, costs, best);
                visited[b] = false;
            }
        }
    }
    let mut visited = vec![false; n];
    visited[source] = true;
    let mut best = f64::INFINITY;
    dfs(source, target, &mut visited, 0.0, edges, costs, &mut best);
    Ok(best.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwl::LinearFn;

    // s=0, a=1, b=2, t=3
    fn diamond() -> (ShortestPath, Vec<f64>) {
        let g = ShortestPath::new(4, vec![(0, 1), (0, 2), (2, 1), (1, 3)], 0, 3).unwrap();
        (g, vec![4.0, 1.0, 1.0, 1.0])
    }

    #[test]
    fn small_example() {
        let (g, c) = diamond();
        let r = g.solve(&c).unwrap();
        assert_eq!(r.objective.value(), 3.0);
        assert_eq!(r.solution, Some(vec![1, 2, 3]));
        assert_eq!(brute_spp(4, g.edges(), &c, 0, 3).unwrap().value(), 3.0);
    }

    #[test]
    fn trivial_graphs() {
        let g = ShortestPath::new(2, vec![(0, 1)], 0, 1).unwrap();
        assert_eq!(g.solve(&[7.0]).unwrap().objective.value(), 7.0);
        let g = ShortestPath::new(3, vec![(0, 1)], 0, 0).unwrap();
        assert_eq!(g.solve(&[7.0]).unwrap().objective.value(), 0.0);
        let g = ShortestPath::new(3, vec![(0, 1)], 0, 2).unwrap();
        let r = g.solve(&[7.0]).unwrap();
        assert_eq!(r.objective, ExtReal::INFINITY);
        assert_eq!(r.solution, None);
        assert_eq!(brute_spp(3, g.edges(), &[7.0], 0, 2).unwrap(), ExtReal::INFINITY);
        assert_eq!(brute_spp(2, &[(0, 1)], &[5.0], 0, 1).unwrap().value(), 5.0);
    }

    #[test]
    fn rejects_duplicate_edges() {
        assert!(ShortestPath::new(2, vec![(0, 1), (0, 1)], 0, 1).is_err());
    }

    #[test]
    fn relearn_parallel_routes() {
        // s=0 -> t=2 directly at cost γ, or through a=1 at cost 1 + 1.
        let g = ShortestPath::new(3, vec![(0, 2), (0, 1), (1, 2)], 0, 2).unwrap();
        let params = [
            GammaParam {
                line: LinearFn::new(1.0, 0.0),
                truth: 3.0,
            },
            GammaParam {
                line: LinearFn::constant(1.0),
                truth: 1.0,
            },
            GammaParam {
                line: LinearFn::constant(1.0),
                truth: 1.0,
            },
        ];
        let f = g.relearn(&params, Interval::new(0.0, 10.0).unwrap()).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.pieces()[0].interval, Interval::new(0.0, 2.0).unwrap());
        assert_eq!(f.pieces()[0].est, LinearFn::new(1.0, 0.0));
        assert_eq!(f.pieces()[0].payload.value(), 3.0);
        assert_eq!(f.pieces()[1].est, LinearFn::constant(2.0));
        assert_eq!(f.pieces()[1].payload.value(), 2.0);
    }

    #[test]
    fn distances_never_increase() {
        let (g, c) = diamond();
        let rounds = g.distance_rounds(&c).unwrap();
        for w in rounds.windows(2) {
            assert!(w[0].iter().zip(&w[1]).all(|(a, b)| b <= a));
        }
    }
}
