//! Capacitated min-cost flow with unknown edge costs, solved by successive
//! shortest paths. Each recursion level finds a cheapest augmenting path in
//! the residual graph and pushes as much flow along it as allowed.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{self, LearnNode, Sense, SolveNode, Solved};
use crate::problem::{check_len, GammaParam, Problem};
use crate::pwl::{CombineOp, ExtReal, Interval, LinearFn, Origin, Piece, PiecewiseInfo, PwlFunction};

/// Residual capacities at or below this are treated as exhausted.
const FLOW_EPS: f64 = 1e-9;

/// When to stop augmenting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowTermination {
    /// Stop once the demand is routed or no augmenting path is left.
    #[default]
    DemandCapped,
    /// Ignore the demand and saturate the network.
    MaxFlow,
}

/// A residual arc: along edge `e`, or against it (undoing flow).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ResidualArc {
    Forward(usize),
    Backward(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinCostFlow {
    n: usize,
    edges: Vec<(usize, usize)>,
    capacities: Vec<f64>,
    source: usize,
    target: usize,
    demand: f64,
    termination: FlowTermination,
    /// Residual arcs entering each vertex as `(tail, arc)`, sorted by tail.
    in_arcs: Vec<Vec<(usize, ResidualArc)>>,
}

/// The flow found by the solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSolution {
    pub flow: Vec<f64>,
    pub delivered: f64,
    /// Whether the full demand was routed.
    pub feasible: bool,
    /// Unit cost of each augmenting path, in order.
    pub path_costs: Vec<f64>,
}

impl MinCostFlow {
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize)>,
        capacities: Vec<f64>,
        source: usize,
        target: usize,
        demand: f64,
    ) -> Result<Self> {
        if n > 128 {
            return Err(Error::InvalidInstance(
                "at most 128 vertices are supported".into(),
            ));
        }
        if source >= n || target >= n || source == target {
            return Err(Error::InvalidInstance(format!(
                "bad endpoints {source},{target} for {n} vertices"
            )));
        }
        check_len(&capacities, edges.len())?;
        if capacities.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidInstance(
                "capacities must be finite and nonnegative".into(),
            ));
        }
        if !(demand.is_finite() && demand >= 0.0) {
            return Err(Error::InvalidInstance(format!("bad demand {demand}")));
        }
        let mut cell = vec![false; n * n];
        let mut in_arcs = vec![Vec::new(); n];
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidInstance(format!("bad edge ({u},{v})")));
            }
            if cell[u * n + v] || cell[v * n + u] {
                return Err(Error::InvalidInstance(format!(
                    "edge ({u},{v}) duplicates or reverses another edge"
                )));
            }
            cell[u * n + v] = true;
            in_arcs[v].push((u, ResidualArc::Forward(e)));
            in_arcs[u].push((v, ResidualArc::Backward(e)));
        }
        for list in &mut in_arcs {
            list.sort_unstable_by_key(|a| a.0);
        }
        Ok(MinCostFlow {
            n,
            edges,
            capacities,
            source,
            target,
            demand,
            termination: FlowTermination::default(),
            in_arcs,
        })
    }

    pub fn with_termination(mut self, termination: FlowTermination) -> Self {
        self.termination = termination;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn demand(&self) -> f64 {
        self.demand
    }

    fn residual(&self, arc: ResidualArc, flow: &[f64]) -> f64 {
        match arc {
            ResidualArc::Forward(e) => self.capacities[e] - flow[e],
            ResidualArc::Backward(e) => flow[e],
        }
    }

    fn arc_cost(arc: ResidualArc, theta: &[f64]) -> f64 {
        match arc {
            ResidualArc::Forward(e) => theta[e],
            ResidualArc::Backward(e) => -theta[e],
        }
    }

    fn arc_line(arc: ResidualArc, params: &[GammaParam]) -> LinearFn {
        match arc {
            ResidualArc::Forward(e) => params[e].line,
            ResidualArc::Backward(e) => params[e].line.scale(-1.0),
        }
    }

    fn demand_met(&self, delivered: f64) -> bool {
        self.termination == FlowTermination::DemandCapped && delivered >= self.demand - FLOW_EPS
    }

    /// Whether the residual graph still connects source to target.
    fn has_path(&self, flow: &[f64]) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![self.target];
        seen[self.target] = true;
        while let Some(v) = stack.pop() {
            for &(u, arc) in &self.in_arcs[v] {
                if !seen[u] && self.residual(arc, flow) > FLOW_EPS {
                    if u == self.source {
                        return true;
                    }
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        false
    }

    /// Pushes flow along `path` and returns the amount pushed.
    fn augment(&self, path: &[ResidualArc], flow: &mut [f64], delivered: f64) -> f64 {
        let mut block = path
            .iter()
            .map(|&a| self.residual(a, flow))
            .fold(f64::INFINITY, f64::min);
        if self.termination == FlowTermination::DemandCapped {
            block = block.min(self.demand - delivered);
        }
        for &arc in path {
            match arc {
                ResidualArc::Forward(e) => flow[e] += block,
                ResidualArc::Backward(e) => flow[e] -= block,
            }
        }
        block
    }

    /// Cheapest augmenting path under `theta`, using Bellman-Ford rounds
    /// that never extend a label through a vertex already on its path.
    fn cheapest_path(&self, flow: &[f64], theta: &[f64]) -> Option<(f64, Vec<ResidualArc>)> {
        let mut dist = vec![Label::unreached(); self.n];
        dist[self.source] = Label::start(self.source);
        for _ in 1..self.n {
            let mut next = dist.clone();
            let mut changed = false;
            for (v, ins) in self.in_arcs.iter().enumerate() {
                for &(u, arc) in ins {
                    let Some(tag) = &dist[u].tag else { continue };
                    if tag.visits(v) || self.residual(arc, flow) <= FLOW_EPS {
                        continue;
                    }
                    let cand = dist[u].dist + Self::arc_cost(arc, theta);
                    if cand < next[v].dist {
                        next[v] = Label {
                            dist: cand,
                            tag: Some(tag.extend(arc, v)),
                        };
                        changed = true;
                    }
                }
            }
            dist = next;
            if !changed {
                break;
            }
        }
        let t = &dist[self.target];
        t.tag.as_ref().map(|tag| (t.dist, tag.arcs.clone()))
    }

    /// Piecewise version of [`cheapest_path`](Self::cheapest_path): for every
    /// γ in `domain` the path that the scalar search would pick at γ.
    fn cheapest_paths(
        &self,
        flow: &[f64],
        params: &[GammaParam],
        domain: Interval,
    ) -> Result<PiecewiseInfo<Option<Arc<PathTag>>>> {
        let unreached = Tagged::unreached(domain);
        let mut dist = vec![unreached; self.n];
        dist[self.source] = Tagged {
            f: PwlFunction::zero(domain),
            tags: vec![Some(Arc::new(PathTag::start(self.source)))],
        };
        for _ in 1..self.n {
            let mut next = dist.clone();
            let mut changed = false;
            for (v, ins) in self.in_arcs.iter().enumerate() {
                for &(u, arc) in ins {
                    if self.residual(arc, flow) <= FLOW_EPS || dist[u].tags.iter().all(Option::is_none) {
                        continue;
                    }
                    let cand = dist[u].extend(arc, v, Self::arc_line(arc, params))?;
                    let (h, origins) = next[v].f.combine_traced(&cand.f, CombineOp::Min)?;
                    let mut tags = Vec::with_capacity(origins.len());
                    for o in origins {
                        tags.push(match o {
                            Origin::Left(i) => next[v].tags[i].clone(),
                            Origin::Right(j) => {
                                changed = true;
                                cand.tags[j].clone()
                            }
                            Origin::Both(..) => unreachable!("min never mixes operands"),
                        });
                    }
                    next[v] = Tagged { f: h, tags }.merged();
                }
            }
            dist = next;
            if !changed {
                break;
            }
        }
        let t = dist.swap_remove(self.target);
        let parts = t.f.pieces().iter().map(|p| p.interval).zip(t.tags).collect();
        Ok(PiecewiseInfo::from_parts(parts)?.merge_adjacent())
    }
}

/// Arcs of a path from the source together with the set of vertices it
/// visits.
#[derive(Clone, Debug, PartialEq)]
struct PathTag {
    arcs: Vec<ResidualArc>,
    visited: u128,
}

impl PathTag {
    fn start(source: usize) -> Self {
        PathTag {
            arcs: Vec::new(),
            visited: 1 << source,
        }
    }

    fn visits(&self, v: usize) -> bool {
        self.visited >> v & 1 == 1
    }

    fn extend(&self, arc: ResidualArc, head: usize) -> Arc<PathTag> {
        let mut arcs = Vec::with_capacity(self.arcs.len() + 1);
        arcs.extend_from_slice(&self.arcs);
        arcs.push(arc);
        Arc::new(PathTag {
            arcs,
            visited: self.visited | 1 << head,
        })
    }
}

#[derive(Clone)]
struct Label {
    dist: f64,
    tag: Option<Arc<PathTag>>,
}

impl Label {
    fn unreached() -> Self {
        Label {
            dist: f64::INFINITY,
            tag: None,
        }
    }

    fn start(source: usize) -> Self {
        Label {
            dist: 0.0,
            tag: Some(Arc::new(PathTag::start(source))),
        }
    }
}

/// A distance function with the path realizing each piece.
#[derive(Clone)]
struct Tagged {
    f: PwlFunction,
    tags: Vec<Option<Arc<PathTag>>>,
}

impl Tagged {
    fn unreached(domain: Interval) -> Self {
        Tagged {
            f: PwlFunction::constant(ExtReal::INFINITY, domain, ExtReal::INFINITY),
            tags: vec![None],
        }
    }

    /// Extends every piece's path by `arc` into `head`; pieces whose path
    /// already visits `head` become unreachable.
    fn extend(&self, arc: ResidualArc, head: usize, cost: LinearFn) -> Result<Tagged> {
        let mut pieces = Vec::with_capacity(self.tags.len());
        let mut tags = Vec::with_capacity(self.tags.len());
        for (p, tag) in self.f.pieces().iter().zip(&self.tags) {
            match tag {
                Some(t) if !t.visits(head) => {
                    pieces.push(Piece::new(p.interval, p.est.checked_add(&cost)?, 0.0));
                    tags.push(Some(t.extend(arc, head)));
                }
                _ => {
                    pieces.push(Piece::new(
                        p.interval,
                        LinearFn::constant(ExtReal::INFINITY),
                        ExtReal::INFINITY,
                    ));
                    tags.push(None);
                }
            }
        }
        Ok(Tagged {
            f: PwlFunction::from_pieces(pieces)?,
            tags,
        })
    }

    /// Joins neighbours carrying the same path.
    fn merged(self) -> Tagged {
        let mut pieces: Vec<Piece> = Vec::with_capacity(self.tags.len());
        let mut tags: Vec<Option<Arc<PathTag>>> = Vec::with_capacity(self.tags.len());
        for (p, tag) in self.f.pieces().iter().zip(self.tags) {
            let same = match (tags.last(), &tag) {
                (Some(Some(a)), Some(b)) => Arc::ptr_eq(a, b),
                (Some(None), None) => true,
                _ => false,
            };
            if same && pieces.last().is_some_and(|l| l.est == p.est) {
                pieces.last_mut().unwrap().interval.hi = p.interval.hi;
            } else {
                pieces.push(*p);
                tags.push(tag);
            }
        }
        Tagged {
            f: PwlFunction::from_pieces(pieces).expect("merging keeps a partition"),
            tags,
        }
    }
}

struct Node<'a, T> {
    network: &'a MinCostFlow,
    params: &'a [T],
    flow: Vec<f64>,
    delivered: f64,
    path_costs: Vec<f64>,
    /// Set when the path search found nothing although the residual graph
    /// is connected; treated as a base case.
    stuck: bool,
}

impl<T> Node<'_, T> {
    fn at_base(&self) -> bool {
        self.stuck || self.network.demand_met(self.delivered) || !self.network.has_path(&self.flow)
    }

    fn child(&self, path: Option<&[ResidualArc]>, unit_cost: f64) -> Self {
        let mut flow = self.flow.clone();
        let mut delivered = self.delivered;
        let mut path_costs = self.path_costs.clone();
        if let Some(p) = path {
            delivered += self.network.augment(p, &mut flow, delivered);
            path_costs.push(unit_cost);
        }
        Node {
            network: self.network,
            params: self.params,
            flow,
            delivered,
            path_costs,
            stuck: path.is_none(),
        }
    }
}

impl SolveNode for Node<'_, f64> {
    type Solution = FlowSolution;
    type Info = Option<(f64, Vec<ResidualArc>)>;

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn is_base(&self) -> bool {
        self.at_base()
    }

    fn base_result(&self) -> Solved<FlowSolution> {
        let cost: f64 = self.flow.iter().zip(self.params).map(|(f, c)| f * c).sum();
        Solved {
            solution: FlowSolution {
                flow: self.flow.clone(),
                delivered: self.delivered,
                feasible: self.delivered >= self.network.demand - FLOW_EPS,
                path_costs: self.path_costs.clone(),
            },
            objective: cost.into(),
        }
    }

    fn extract(&self) -> Self::Info {
        self.network.cheapest_path(&self.flow, self.params)
    }

    fn branch(&self, info: &Self::Info) -> Vec<Self> {
        vec![match info {
            Some((d, path)) => self.child(Some(path), *d),
            None => self.child(None, 0.0),
        }]
    }
}

impl LearnNode for Node<'_, GammaParam> {
    type Info = Option<Arc<PathTag>>;

    fn reduce_op(&self) -> CombineOp {
        CombineOp::Min
    }

    fn is_base(&self) -> bool {
        self.at_base()
    }

    fn base_result(&self, domain: Interval) -> Result<PwlFunction> {
        let mut est = LinearFn::constant(0.0);
        let mut payload = 0.0;
        for (f, p) in self.flow.iter().zip(self.params) {
            est = est.checked_add(&p.line.scale(*f))?;
            payload += f * p.truth;
        }
        Ok(PwlFunction::linear(domain, est, payload))
    }

    fn extract(&self, domain: Interval) -> Result<PiecewiseInfo<Option<Arc<PathTag>>>> {
        self.network.cheapest_paths(&self.flow, self.params, domain)
    }

    fn branch(&self, tag: &Option<Arc<PathTag>>) -> Vec<Self> {
        vec![self.child(tag.as_ref().map(|t| t.arcs.as_slice()), 0.0)]
    }
}

impl Problem for MinCostFlow {
    type Solution = FlowSolution;

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn param_count(&self) -> usize {
        self.edges.len()
    }

    fn solve(&self, theta: &[f64]) -> Result<Solved<FlowSolution>> {
        check_len(theta, self.edges.len())?;
        let root = Node {
            network: self,
            params: theta,
            flow: vec![0.0; self.edges.len()],
            delivered: 0.0,
            path_costs: Vec::new(),
            stuck: false,
        };
        framework::resolve(&root)
    }

    fn objective(&self, solution: &FlowSolution, theta: &[f64]) -> Result<f64> {
        check_len(theta, self.edges.len())?;
        Ok(solution.flow.iter().zip(theta).map(|(f, c)| f * c).sum())
    }

    fn is_feasible(&self, solution: &FlowSolution) -> bool {
        solution.feasible
    }

    fn relearn(&self, params: &[GammaParam], domain: Interval) -> Result<PwlFunction> {
        check_len(params, self.edges.len())?;
        let root = Node {
            network: self,
            params,
            flow: vec![0.0; self.edges.len()],
            delivered: 0.0,
            path_costs: Vec::new(),
            stuck: false,
        };
        framework::relearn(&root, domain)
    }
}

/// Largest flow the network can carry from source to target.
pub fn max_flow(net: &MinCostFlow) -> f64 {
    let capped = MinCostFlow {
        termination: FlowTermination::MaxFlow,
        ..net.clone()
    };
    let zeros = vec![0.0; net.edges.len()];
    capped.solve(&zeros).map(|s| s.solution.delivered).unwrap_or(0.0)
}

/// Cheapest way to route exactly the demand, by enumerating integral edge
/// flows. `None` when the demand cannot be routed. At most 6 edges with
/// integral capacities of at most 20.
pub fn brute_mcfp(net: &MinCostFlow, costs: &[f64]) -> Result<Option<f64>> {
    let m = net.edges.len();
    if m > 6 || net.capacities.iter().any(|&c| c > 20.0 || c.fract() != 0.0) {
        return Err(Error::TooLarge(format!("{m} edges")));
    }
    check_len(costs, m)?;
    // Conservation at a vertex can be checked once its last edge is fixed.
    let mut last = vec![None; net.n];
    for (e, &(u, v)) in net.edges.iter().enumerate() {
        last[u] = Some(e);
        last[v] = Some(e);
    }
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (v, l) in last.iter().enumerate() {
        if let Some(e) = l {
            closes[*e].push(v);
        }
    }
    let isolated_ok =
        |v: usize| last[v].is_some() || (v != net.source && v != net.target) || net.demand == 0.0;
    if !(0..net.n).all(isolated_ok) {
        return Ok(None);
    }

    struct Search<'a> {
        net: &'a MinCostFlow,
        costs: &'a [f64],
        closes: Vec<Vec<usize>>,
        balance: Vec<f64>,
        best: Option<f64>,
    }
    impl Search<'_> {
        fn required(&self, v: usize) -> f64 {
            if v == self.net.source {
                -self.net.demand
            } else if v == self.net.target {
                self.net.demand
            } else {
                0.0
            }
        }
        fn go(&mut self, e: usize, acc: f64) {
            if e == self.net.edges.len() {
                if self.best.is_none_or(|b| acc < b) {
                    self.best = Some(acc);
                }
                return;
            }
            let (u, v) = self.net.edges[e];
            for f in 0..=self.net.capacities[e] as u32 {
                let f = f as f64;
                self.balance[u] -= f;
                self.balance[v] += f;
                if self.closes[e]
                    .iter()
                    .all(|&w| self.balance[w] == self.required(w))
                {
                    self.go(e + 1, acc + f * self.costs[e]);
                }
                self.balance[u] += f;
                self.balance[v] -= f;
            }
        }
    }
    let mut s = Search {
        net,
        costs,
        closes,
        balance: vec![0.0; net.n],
        best: None,
    };
    s.go(0, 0.0);
    Ok(s.best)
}
