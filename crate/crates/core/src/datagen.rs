//! Synthetic datasets, random instances, splitting and dataset files.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::GraphFile;
use crate::model::{FeatureMatrix, TrainingExample};
use crate::problem::Problem;
use crate::problems::{max_flow, Knapsack, MinCostFlow, ShortestPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Ks,
    Spp,
    Mcfp,
    Mcvc,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Ks => "ks",
            ProblemKind::Spp => "spp",
            ProblemKind::Mcfp => "mcfp",
            ProblemKind::Mcvc => "mcvc",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ks" => Ok(ProblemKind::Ks),
            "spp" => Ok(ProblemKind::Spp),
            "mcfp" => Ok(ProblemKind::Mcfp),
            "mcvc" => Ok(ProblemKind::Mcvc),
            _ => Err(Error::Config(format!("unknown problem {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub problem: Option<ProblemKind>,
    pub graph: Option<String>,
    pub seed: Option<u64>,
    /// Features per parameter.
    pub m: usize,
    /// Parameters per example.
    pub t: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub examples: Vec<TrainingExample>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(examples: Vec<TrainingExample>, meta: DatasetMeta) -> Result<Self> {
        for (i, ex) in examples.iter().enumerate() {
            if ex.features.rows() != meta.t || ex.features.cols() != meta.m {
                return Err(Error::Dimension(format!(
                    "example {i} is {}x{}, expected {}x{}",
                    ex.features.rows(),
                    ex.features.cols(),
                    meta.t,
                    meta.m
                )));
            }
        }
        Ok(Dataset { examples, meta })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Unit of the trigonometric arguments in the synthetic truth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Angle {
    #[default]
    Radians,
    Degrees,
}

/// Default offset keeping every synthetic parameter positive.
pub const DEFAULT_OFFSET: f64 = 200.0;

/// `10 sin(a1) sin(a2) + 100 sin(a3) sin(a4) + offset`.
pub fn synthetic_truth(a: &[f64; 4], offset: f64, angle: Angle) -> f64 {
    let s = |x: f64| match angle {
        Angle::Radians => x.sin(),
        Angle::Degrees => x.to_radians().sin(),
    };
    10.0 * s(a[0]) * s(a[1]) + 100.0 * s(a[2]) * s(a[3]) + offset
}

/// `n` examples of `t` parameters with four features each: day of week in
/// `1..=7`, day of month in `1..=30`, and two readings in `[0, 360]`.
pub fn gen_artificial(t: usize, n: usize, offset: f64, seed: u64, angle: Angle) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("dataset size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(n);
    for _ in 0..n {
        let mut data = Vec::with_capacity(4 * t);
        let mut truth = Vec::with_capacity(t);
        for _ in 0..t {
            let a = [
                rng.gen_range(1..=7) as f64,
                rng.gen_range(1..=30) as f64,
                rng.gen_range(0.0..=360.0),
                rng.gen_range(0.0..=360.0),
            ];
            data.extend_from_slice(&a);
            truth.push(synthetic_truth(&a, offset, angle));
        }
        examples.push(TrainingExample::new(FeatureMatrix::new(t, 4, data)?, truth)?);
    }
    Dataset::new(
        examples,
        DatasetMeta {
            seed: Some(seed),
            m: 4,
            t,
            ..DatasetMeta::default()
        },
    )
}

/// Seeded shuffle, then the first `ceil(ratio * n)` examples for training.
pub fn split(d: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio {ratio} not in (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    // Guard against 0.7 * 100 = 70.00000000000001.
    let cut = ((ratio * d.len() as f64) - 1e-9).ceil().max(0.0) as usize;
    let cut = cut.min(d.len());
    let pick = |ids: &[usize]| Dataset {
        examples: ids.iter().map(|&i| d.examples[i].clone()).collect(),
        meta: d.meta.clone(),
    };
    Ok((pick(&idx[..cut]), pick(&idx[cut..])))
}

/// How the source and sink of a random network instance are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminalRule {
    Candidates {
        sources: Vec<usize>,
        sinks: Vec<usize>,
    },
    /// Sources with no incoming edge, sinks with no outgoing edge.
    ZeroDegree,
    Fixed {
        source: usize,
        sink: usize,
    },
    /// Any two distinct vertices.
    Any,
}

impl TerminalRule {
    /// The per-graph random rule.
    pub fn for_graph(graph_id: &str) -> TerminalRule {
        match graph_id {
            // Sink 24 does not exist on a 24-vertex graph and is dropped.
            "usanet" => TerminalRule::Candidates {
                sources: (1..=5).collect(),
                sinks: (20..=24).collect(),
            },
            "geant" => TerminalRule::ZeroDegree,
            _ => TerminalRule::Any,
        }
    }

    /// The per-graph fixed pair, where one is defined.
    pub fn fixed_for_graph(graph_id: &str) -> Option<TerminalRule> {
        match graph_id {
            "usanet" => Some(TerminalRule::Fixed { source: 0, sink: 23 }),
            "geant" => Some(TerminalRule::Fixed { source: 0, sink: 31 }),
            _ => None,
        }
    }

    fn candidates(&self, g: &GraphFile) -> (Vec<usize>, Vec<usize>) {
        let n = g.vertices;
        let (s, t) = match self {
            TerminalRule::Candidates { sources, sinks } => (sources.clone(), sinks.clone()),
            TerminalRule::ZeroDegree => (
                (0..n).filter(|&v| g.in_degree(v) == 0).collect(),
                (0..n).filter(|&v| g.out_degree(v) == 0).collect(),
            ),
            TerminalRule::Fixed { source, sink } => (vec![*source], vec![*sink]),
            TerminalRule::Any => ((0..n).collect(), (0..n).collect()),
        };
        let keep = |v: Vec<usize>| v.into_iter().filter(|&x| x < n).collect::<Vec<_>>();
        (keep(s), keep(t))
    }

    /// A random distinct (source, sink) pair.
    pub fn draw(&self, g: &GraphFile, rng: &mut impl Rng) -> Result<(usize, usize)> {
        let (sources, sinks) = self.candidates(g);
        let pairs: Vec<(usize, usize)> = sources
            .iter()
            .flat_map(|&s| sinks.iter().filter(move |&&t| t != s).map(move |&t| (s, t)))
            .collect();
        pairs
            .choose(rng)
            .copied()
            .ok_or_else(|| Error::InvalidInstance("no valid source/sink candidates".into()))
    }
}

/// Random parts of a flow instance; the edge costs stay unknown.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowInstance {
    pub source: usize,
    pub sink: usize,
    pub capacities: Vec<f64>,
    pub demand: f64,
}

impl FlowInstance {
    pub fn network(&self, g: &GraphFile) -> Result<MinCostFlow> {
        MinCostFlow::new(
            g.vertices,
            g.edges.clone(),
            self.capacities.clone(),
            self.source,
            self.sink,
            self.demand,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSampling {
    /// Integer capacities are uniform on this inclusive range.
    pub capacity: (u32, u32),
    pub demand: f64,
    /// Redraws allowed when the demand cannot be routed.
    pub attempts: usize,
}

impl Default for FlowSampling {
    fn default() -> Self {
        FlowSampling {
            capacity: (10, 50),
            demand: 20.0,
            attempts: 1000,
        }
    }
}

/// Draws terminals and capacities until the demand can be routed.
pub fn gen_flow_instance(
    g: &GraphFile,
    rule: &TerminalRule,
    sampling: &FlowSampling,
    seed: u64,
) -> Result<FlowInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = sampling.capacity;
    for _ in 0..sampling.attempts.max(1) {
        let (source, sink) = rule.draw(g, &mut rng)?;
        let capacities = (0..g.edge_count())
            .map(|_| rng.gen_range(lo..=hi) as f64)
            .collect();
        let inst = FlowInstance {
            source,
            sink,
            capacities,
            demand: sampling.demand,
        };
        if max_flow(&inst.network(g)?) >= sampling.demand {
            return Ok(inst);
        }
    }
    Err(Error::Infeasible(format!(
        "no instance routing {} units after {} draws",
        sampling.demand, sampling.attempts
    )))
}

/// A shortest-path instance whose target is reachable from its source.
pub fn gen_path_instance(g: &GraphFile, rule: &TerminalRule, seed: u64) -> Result<ShortestPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let (s, t) = rule.draw(g, &mut rng)?;
        let spp = ShortestPath::new(g.vertices, g.edges.clone(), s, t)?;
        if spp.solve(&vec![1.0; g.edge_count()])?.objective.is_finite() {
            return Ok(spp);
        }
    }
    Err(Error::Infeasible("no reachable source/sink pair".into()))
}

/// `items` items with integer costs in `1..=10` and half the total cost as
/// budget, rounded down.
pub fn gen_knapsack_instance(items: usize, seed: u64) -> Result<Knapsack> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs: Vec<f64> = (0..items).map(|_| rng.gen_range(1..=10) as f64).collect();
    let budget = (costs.iter().sum::<f64>() / 2.0).floor();
    Knapsack::new(costs, budget)
}

/// Reads `cost` rows after a `# budget: W` comment and a `cost` header.
pub fn load_knapsack(path: impl AsRef<Path>) -> Result<Knapsack> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let err = |line: usize, msg: String| Error::Parse {
        path: path.into(),
        line: line as u64,
        msg,
    };
    let mut budget = None;
    let mut header = false;
    let mut costs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some(b) = c.trim().strip_prefix("budget:") {
                budget = Some(
                    b.trim()
                        .parse::<f64>()
                        .map_err(|_| err(i + 1, "bad budget".into()))?,
                );
            }
            continue;
        }
        if !header {
            if line != "cost" {
                return Err(err(i + 1, "expected header cost".into()));
            }
            header = true;
            continue;
        }
        costs.push(
            line.parse::<f64>()
                .map_err(|_| err(i + 1, format!("bad cost {line:?}")))?,
        );
    }
    let budget = budget.ok_or_else(|| err(1, "missing # budget: line".into()))?;
    Knapsack::new(costs, budget)
}

/// Writes a dataset as one row per (example, parameter):
/// `example,param,f0,..,f{m-1},truth`, preceded by `# key=value` lines.
pub fn write_dataset(d: &Dataset, out: impl Write) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    if let Some(p) = d.meta.problem {
        writeln!(out, "# problem={p}")?;
    }
    if let Some(g) = &d.meta.graph {
        writeln!(out, "# graph={g}")?;
    }
    if let Some(s) = d.meta.seed {
        writeln!(out, "# seed={s}")?;
    }
    writeln!(out, "# m={}", d.meta.m)?;
    writeln!(out, "# t={}", d.meta.t)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["example".to_string(), "param".to_string()];
    header.extend((0..d.meta.m).map(|j| format!("f{j}")));
    header.push("truth".into());
    w.write_record(&header)?;
    for (i, ex) in d.examples.iter().enumerate() {
        for p in 0..d.meta.t {
            let mut rec = vec![i.to_string(), p.to_string()];
            rec.extend(ex.features.row(p).iter().map(f64::to_string));
            rec.push(ex.truth[p].to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_dataset(d, std::fs::File::create(path)?)
}

/// Reads a dataset written by [`write_dataset`]. `t` and `m` are inferred
/// from the file when not given.
pub fn read_dataset(src: impl Read, name: &Path, t: Option<usize>, m: Option<usize>) -> Result<Dataset> {
    let err = |line: u64, msg: String| Error::Parse {
        path: name.to_path_buf(),
        line,
        msg,
    };
    let mut text = String::new();
    std::io::BufReader::new(src).read_to_string(&mut text)?;
    let mut meta = DatasetMeta::default();
    let mut declared_t = None;
    let mut declared_m = None;
    for (i, line) in text.lines().enumerate() {
        let Some(c) = line.trim().strip_prefix('#') else {
            continue;
        };
        let Some((k, v)) = c.split_once('=') else { continue };
        let (k, v) = (k.trim(), v.trim());
        let line = i as u64 + 1;
        match k {
            "problem" => meta.problem = Some(v.parse().map_err(|e: Error| err(line, e.to_string()))?),
            "graph" => meta.graph = Some(v.to_string()),
            "seed" => meta.seed = Some(v.parse().map_err(|_| err(line, format!("bad seed {v:?}")))?),
            "t" => declared_t = Some(v.parse().map_err(|_| err(line, format!("bad t {v:?}")))?),
            "m" => declared_m = Some(v.parse().map_err(|_| err(line, format!("bad m {v:?}")))?),
            _ => log::debug!("ignoring metadata key {k}"),
        }
    }

    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    let width = cols.len();
    if width < 3 || cols[0] != "example" || cols[1] != "param" || cols[width - 1] != "truth" {
        return Err(err(1, "expected header example,param,f0,..,truth".into()));
    }
    let file_m = width - 3;
    for want in [m, declared_m].into_iter().flatten() {
        if want != file_m {
            return Err(err(1, format!("expected {want} features, file has {file_m}")));
        }
    }
    meta.m = file_m;

    let mut examples = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    let mut truth = Vec::new();
    let mut current = 0usize;
    let mut finish = |rows: &mut Vec<f64>, truth: &mut Vec<f64>| -> Result<()> {
        let n = truth.len();
        examples.push(TrainingExample::new(
            FeatureMatrix::new(n, file_m, std::mem::take(rows))?,
            std::mem::take(truth),
        )?);
        Ok(())
    };
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(err(
                line,
                format!("expected {width} columns, found {}", rec.len()),
            ));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(line, format!("bad index {s:?}")))
        };
        let (ex, p) = (int(&rec[0])?, int(&rec[1])?);
        if ex == current + 1 && !truth.is_empty() {
            finish(&mut rows, &mut truth)?;
            current = ex;
        } else if ex != current {
            return Err(err(
                line,
                format!("example ids must be consecutive from 0, found {ex}"),
            ));
        }
        if p != truth.len() {
            return Err(err(line, format!("expected param {}, found {p}", truth.len())));
        }
        for j in 2..width {
            let v: f64 = rec[j]
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(line, format!("bad number {:?}", &rec[j])))?;
            if j == width - 1 {
                truth.push(v);
            } else {
                rows.push(v);
            }
        }
    }
    if !truth.is_empty() {
        finish(&mut rows, &mut truth)?;
    }
    let file_t = examples
        .first()
        .map_or(declared_t.unwrap_or(0), |e| e.truth.len());
    for (want, what) in [(t, "argument"), (declared_t, "header")] {
        if let Some(want) = want {
            if want != file_t {
                return Err(err(1, format!("{what} says t={want}, rows have {file_t}")));
            }
        }
    }
    meta.t = file_t;
    Dataset::new(examples, meta).map_err(|e| err(0, e.to_string()))
}

pub fn load_dataset_csv(path: impl AsRef<Path>, t: Option<usize>, m: Option<usize>) -> Result<Dataset> {
    let path: PathBuf = path.as_ref().into();
    read_dataset(std::fs::File::open(&path)?, &path, t, m)
}
