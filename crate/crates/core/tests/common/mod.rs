#![allow(dead_code)]

use bnl_core::model::{Coefficients, FeatureMatrix, TrainingExample};
use bnl_core::problem::{construct, GammaParam, Problem};
use bnl_core::problems::{Knapsack, MinCostFlow, ShortestPath, VertexCover};
use bnl_core::pwl::{Interval, LinearFn, Piece, PwlFunction};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn ints(rng: &mut impl Rng, n: usize, lo: i32, hi: i32) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..=hi) as f64).collect()
}

pub fn knapsack(rng: &mut impl Rng, max_items: usize) -> Knapsack {
    let n = rng.gen_range(1..=max_items);
    let costs = ints(rng, n, 1, 10);
    let total: f64 = costs.iter().sum();
    let budget = rng.gen_range(0..=total as i32) as f64;
    Knapsack::new(costs, budget).unwrap()
}

/// Random simple digraph without self-loops; with `oriented` no edge has
/// its reverse present.
pub fn digraph(rng: &mut impl Rng, n: usize, p: f64, oriented: bool) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || (oriented && edges.contains(&(v, u))) {
                continue;
            }
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn shortest_path(rng: &mut impl Rng, max_vertices: usize) -> ShortestPath {
    let n = rng.gen_range(2..=max_vertices);
    let edges = digraph(rng, n, 0.35, false);
    let s = rng.gen_range(0..n);
    let t = (s + rng.gen_range(1..n)) % n;
    ShortestPath::new(n, edges, s, t).unwrap()
}

/// A flow network with at most `max_edges` edges, integral capacities and
/// demand.
pub fn flow_network(rng: &mut impl Rng, max_edges: usize) -> MinCostFlow {
    let n = rng.gen_range(2..=5);
    let mut edges = digraph(rng, n, 0.5, true);
    edges.shuffle(rng);
    edges.truncate(rng.gen_range(1..=max_edges));
    let caps = ints(rng, edges.len(), 1, 6);
    let demand = rng.gen_range(1..=8) as f64;
    MinCostFlow::new(n, edges, caps, 0, n - 1, demand).unwrap()
}

pub fn undirected(rng: &mut impl Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn vertex_cover(rng: &mut impl Rng, max_vertices: usize) -> VertexCover {
    let n = rng.gen_range(1..=max_vertices);
    VertexCover::new(n, undirected(rng, n, 0.4)).unwrap()
}

pub fn features(rng: &mut impl Rng, t: usize, m: usize) -> FeatureMatrix {
    FeatureMatrix::new(t, m, (0..t * m).map(|_| rng.gen_range(0.0..5.0)).collect()).unwrap()
}

pub fn alpha(rng: &mut impl Rng, m: usize) -> Coefficients {
    Coefficients((0..m).map(|_| rng.gen_range(-1.0..3.0)).collect())
}

/// A random coordinate problem with a nonempty admissible domain, with
/// the domain clipped to a window of width `window` for sampling.
pub fn param_line<P: Problem>(
    rng: &mut impl Rng,
    p: &P,
    m: usize,
    window: f64,
) -> (Vec<GammaParam>, Interval, Interval) {
    let t = p.param_count();
    loop {
        let a = features(rng, t, m);
        let truth = ints(rng, t, 0, 20);
        let al = alpha(rng, m);
        let k = rng.gen_range(0..m);
        if let Some((params, domain)) = construct(p, &a, &truth, &al, k).unwrap() {
            let lo = domain.lo().max(-window);
            let lo = if lo.is_finite() { lo } else { -window };
            let hi = domain.hi().min(lo + 2.0 * window);
            if let Ok(w) = Interval::new(lo, hi) {
                if hi > lo {
                    return (params, domain, w);
                }
            }
        }
    }
}

/// Synthetic data: `n` examples for `p`, with truth from `truth_of`.
pub fn dataset<P: Problem>(
    rng: &mut impl Rng,
    p: &P,
    n: usize,
    m: usize,
    mut truth_of: impl FnMut(&mut dyn rand::RngCore, &[f64]) -> f64,
) -> Vec<TrainingExample> {
    let t = p.param_count();
    (0..n)
        .map(|_| {
            let a = features(rng, t, m);
            let truth = (0..t).map(|i| truth_of(rng, a.row(i))).collect();
            TrainingExample::new(a, truth).unwrap()
        })
        .collect()
}

/// A random finite piecewise-linear function on `domain`.
pub fn pwl(rng: &mut impl Rng, domain: Interval, max_pieces: usize) -> PwlFunction {
    let lo = if domain.lo().is_finite() {
        domain.lo()
    } else {
        -50.0
    };
    let hi = if domain.hi().is_finite() {
        domain.hi()
    } else {
        50.0
    };
    let k = rng.gen_range(1..=max_pieces);
    let mut cuts: Vec<f64> = (1..k).map(|_| rng.gen_range(lo..hi)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.retain(|&c| c > domain.lo() && c < domain.hi());
    let mut bounds = vec![domain.lo()];
    bounds.extend(cuts);
    bounds.push(domain.hi());
    let pieces = bounds
        .windows(2)
        .map(|w| {
            let est = LinearFn::new(rng.gen_range(-3.0..3.0), rng.gen_range(-10.0..10.0));
            Piece::new(
                Interval::new(w[0], w[1]).unwrap(),
                est,
                rng.gen_range(-20..=20) as f64,
            )
        })
        .collect();
    PwlFunction::from_pieces(pieces).unwrap()
}

/// A point of `w` drawn uniformly, where `w` is bounded.
pub fn point(rng: &mut impl Rng, w: Interval) -> f64 {
    if w.lo() == w.hi() {
        w.lo()
    } else {
        rng.gen_range(w.lo()..=w.hi())
    }
}

/// Compares the optimal-value function of one random coordinate problem
/// with direct solving at `samples` values of γ. Returns the first
/// discrepancy found.
pub fn check_consistency<P: Problem>(
    rng: &mut impl Rng,
    p: &P,
    m: usize,
    samples: usize,
) -> Result<(), String> {
    let (params, domain, window) = param_line(rng, p, m, 20.0);
    let e = p.relearn(&params, domain).map_err(|e| e.to_string())?;
    if !e.is_valid() || e.domain() != domain {
        return Err(format!("malformed result on {domain}"));
    }
    let truth: Vec<f64> = params.iter().map(|q| q.truth).collect();
    let breaks: Vec<f64> = e.breakpoints().collect();
    for _ in 0..samples {
        let g = point(rng, window);
        let theta: Vec<f64> = params.iter().map(|q| q.line.eval(g).value()).collect();
        let solved = p.solve(&theta).map_err(|e| e.to_string())?;
        let (est, payload) = e.evaluate(g).map_err(|e| e.to_string())?;
        let (a, b) = (est.value(), solved.objective.value());
        let same = if a.is_finite() || b.is_finite() {
            (a - b).abs() <= 1e-6
        } else {
            a == b
        };
        if !same {
            return Err(format!("γ={g}: learned {a}, solved {b}"));
        }
        if breaks.iter().all(|&x| (x - g).abs() > 1e-6) {
            let want = if solved.objective.is_finite() {
                p.objective(&solved.solution, &truth).map_err(|e| e.to_string())?
            } else {
                f64::INFINITY
            };
            let got = payload.value();
            let ok = if got.is_finite() {
                (got - want).abs() <= 1e-6
            } else {
                got == want
            };
            if !ok {
                return Err(format!("γ={g}: payload {got}, true objective {want}"));
            }
        }
    }
    Ok(())
}
