//! Seeded end-to-end experiments: generate or load data, split, train each
//! method, and report test regret per simulation.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::fit_least_squares;
use crate::datagen::{
    self, gen_artificial, gen_flow_instance, gen_knapsack_instance, gen_path_instance, split, Angle, Dataset,
    FlowSampling, ProblemKind, TerminalRule,
};
use crate::error::{Error, Result};
use crate::graphs::{resolve_graph, Bundled, GraphFile};
use crate::model::{predict, Coefficients};
use crate::problem::{regret, Problem};
use crate::problems::{Knapsack, MinCostFlow, ShortestPath, VertexCover};
use crate::trainer::{coordinate_descent, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bnl,
    Lr,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Bnl => "bnl",
            Method::Lr => "lr",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bnl" => Ok(Method::Bnl),
            "lr" => Ok(Method::Lr),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// Bundled graph name or graph file; a per-problem default when unset.
    pub graph: Option<String>,
    /// Knapsack instance file; a random instance when unset.
    pub instance: Option<PathBuf>,
    /// Dataset file; synthetic data when unset.
    pub data: Option<PathBuf>,
    /// Examples per simulation (synthetic data only).
    pub n: usize,
    pub sims: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Fraction of examples used for training.
    pub split: f64,
    pub offset: f64,
    pub angle: Angle,
    /// Use the per-graph fixed source and sink instead of random ones.
    pub fixed_terminals: bool,
    /// Items of a random knapsack instance.
    pub items: usize,
    /// Record wall time. Off by default so reports are reproducible.
    pub timing: bool,
    pub flow: FlowSampling,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemKind::Mcvc,
            graph: None,
            instance: None,
            data: None,
            n: 100,
            sims: 1,
            methods: vec![Method::Bnl, Method::Lr],
            seed: 0,
            split: 0.7,
            offset: datagen::DEFAULT_OFFSET,
            angle: Angle::Radians,
            fixed_terminals: false,
            items: 10,
            timing: false,
            flow: FlowSampling::default(),
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sims == 0 {
            return Err(Error::Config("sims must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.data.is_none() && self.n < 2 {
            return Err(Error::Config("n must be at least 2".into()));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::Config("split must lie in (0, 1)".into()));
        }
        for p in self.data.iter().chain(&self.instance) {
            if !p.exists() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        self.train.validate()
    }

    /// The graph identifier used in reports.
    pub fn graph_id(&self) -> String {
        match (&self.graph, default_graph(self.problem)) {
            (Some(g), _) => g.clone(),
            (None, Some(b)) => b.name().to_string(),
            (None, None) => "-".to_string(),
        }
    }
}

fn default_graph(p: ProblemKind) -> Option<Bundled> {
    match p {
        ProblemKind::Ks => None,
        ProblemKind::Spp | ProblemKind::Mcfp => Some(Bundled::Usanet),
        ProblemKind::Mcvc => Some(Bundled::Polska),
    }
}

/// Independent seeds for the parts of one simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimSeeds {
    pub instance: u64,
    pub data: u64,
    pub split: u64,
}

impl SimSeeds {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SimSeeds {
            instance: rng.gen(),
            data: rng.gen(),
            split: rng.gen(),
        }
    }
}

/// A concrete problem instance of any supported kind.
#[derive(Clone, Debug)]
pub enum AnyProblem {
    Ks(Knapsack),
    Spp(ShortestPath),
    Mcfp(MinCostFlow),
    Mcvc(VertexCover),
}

macro_rules! with_problem {
    ($any:expr, $p:ident => $body:expr) => {
        match $any {
            AnyProblem::Ks($p) => $body,
            AnyProblem::Spp($p) => $body,
            AnyProblem::Mcfp($p) => $body,
            AnyProblem::Mcvc($p) => $body,
        }
    };
}

impl AnyProblem {
    pub fn param_count(&self) -> usize {
        with_problem!(self, p => p.param_count())
    }

    pub fn nonnegative(&self) -> bool {
        with_problem!(self, p => p.nonnegative())
    }

    /// Optimal objective under `theta`.
    pub fn optimum(&self, theta: &[f64]) -> Result<f64> {
        with_problem!(self, p => {
            let r = p.solve(theta)?;
            if !r.objective.is_finite() || !p.is_feasible(&r.solution) {
                return Err(Error::Infeasible("no feasible solution".into()));
            }
            Ok(r.objective.value())
        })
    }

    pub fn regret(&self, theta_hat: &[f64], theta: &[f64]) -> Result<f64> {
        with_problem!(self, p => regret(p, theta_hat, theta))
    }

    pub fn train(&self, data: &Dataset, cfg: &TrainConfig) -> Result<crate::trainer::TrainReport> {
        with_problem!(self, p => coordinate_descent(std::slice::from_ref(p), &data.examples, cfg))
    }
}

/// Builds the instance of one simulation. `graph` must be given for every
/// graph problem.
pub fn build_instance(cfg: &ExperimentConfig, graph: Option<&GraphFile>, seed: u64) -> Result<AnyProblem> {
    let id = cfg.graph_id();
    let rule = || {
        if cfg.fixed_terminals {
            TerminalRule::fixed_for_graph(&id)
                .ok_or_else(|| Error::Config(format!("no fixed terminals defined for {id}")))
        } else {
            Ok(TerminalRule::for_graph(&id))
        }
    };
    let graph = || graph.ok_or_else(|| Error::Config(format!("{} needs a graph", cfg.problem)));
    Ok(match cfg.problem {
        ProblemKind::Ks => AnyProblem::Ks(match &cfg.instance {
            Some(path) => datagen::load_knapsack(path)?,
            None => gen_knapsack_instance(cfg.items, seed)?,
        }),
        ProblemKind::Spp => AnyProblem::Spp(gen_path_instance(graph()?, &rule()?, seed)?),
        ProblemKind::Mcfp => {
            let g = graph()?;
            let f = gen_flow_instance(g, &rule()?, &cfg.flow, seed)?;
            AnyProblem::Mcfp(f.network(g)?)
        }
        ProblemKind::Mcvc => {
            let g = graph()?;
            AnyProblem::Mcvc(VertexCover::new(g.vertices, g.edges.clone())?.with_pruning(true))
        }
    })
}

/// The graph named by the configuration, if the problem uses one.
pub fn load_graph(cfg: &ExperimentConfig) -> Result<Option<GraphFile>> {
    if cfg.problem == ProblemKind::Ks {
        return Ok(None);
    }
    resolve_graph(&cfg.graph_id()).map(Some)
}

/// Trains `method` on `train`.
pub fn fit(method: Method, problem: &AnyProblem, train: &Dataset, cfg: &TrainConfig) -> Result<Coefficients> {
    match method {
        Method::Lr => Ok(fit_least_squares(&train.examples)?.alpha),
        Method::Bnl => {
            let report = problem.train(train, cfg)?;
            for w in &report.warnings {
                log::warn!("{w}");
            }
            Ok(report.alpha)
        }
    }
}

/// Mean test regret of `alpha` and mean true optimum over `test`.
pub fn evaluate(problem: &AnyProblem, alpha: &Coefficients, test: &Dataset) -> Result<(f64, f64)> {
    if test.is_empty() {
        return Err(Error::Config("empty test set".into()));
    }
    let mut total = 0.0;
    let mut tov = 0.0;
    for ex in &test.examples {
        let theta_hat = predict(alpha, &ex.features, problem.nonnegative())?;
        total += problem.regret(&theta_hat, &ex.truth)?;
        tov += problem.optimum(&ex.truth)?;
    }
    let n = test.len() as f64;
    Ok((total / n, tov / n))
}

/// Result of one method in one simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub method: Method,
    pub problem: ProblemKind,
    pub graph: String,
    pub n: usize,
    pub sim: usize,
    /// Mean regret over the test examples.
    pub regret: f64,
    /// Mean true optimal value over the test examples.
    pub true_opt: f64,
    pub seconds: f64,
}

/// Aggregate over simulations; standard deviations are sample deviations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: Method,
    pub problem: ProblemKind,
    pub graph: String,
    pub n: usize,
    pub sims: usize,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_true_opt: f64,
    pub std_true_opt: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<SimRow>,
    pub summaries: Vec<Summary>,
    /// Simulations dropped because an instance was infeasible.
    pub skipped_sims: usize,
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn run_sim(
    cfg: &ExperimentConfig,
    graph: Option<&GraphFile>,
    loaded: Option<&Dataset>,
    sim: usize,
) -> Result<Vec<SimRow>> {
    let seeds = SimSeeds::new(cfg.seed.wrapping_add(sim as u64));
    let problem = build_instance(cfg, graph, seeds.instance)?;
    let data = match loaded {
        Some(d) => d.clone(),
        None => gen_artificial(problem.param_count(), cfg.n, cfg.offset, seeds.data, cfg.angle)?,
    };
    if data.meta.t != problem.param_count() {
        return Err(Error::Dimension(format!(
            "dataset has {} parameters per example, instance needs {}",
            data.meta.t,
            problem.param_count()
        )));
    }
    let (train, test) = split(&data, cfg.split, seeds.split)?;
    if test.is_empty() {
        return Err(Error::Config("split leaves no test examples".into()));
    }
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let start = Instant::now();
        let alpha = fit(method, &problem, &train, &cfg.train)?;
        let (regret, true_opt) = evaluate(&problem, &alpha, &test)?;
        let seconds = if cfg.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        log::info!("sim {sim} {method}: regret {regret:.4}, true optimum {true_opt:.4}");
        rows.push(SimRow {
            method,
            problem: cfg.problem,
            graph: cfg.graph_id(),
            n: data.len(),
            sim,
            regret,
            true_opt,
            seconds,
        });
    }
    Ok(rows)
}

/// Runs every simulation of `cfg`. Simulation `s` draws all of its
/// randomness from seed `cfg.seed + s`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let graph = load_graph(cfg)?;
    let loaded = match &cfg.data {
        Some(path) => {
            let d = datagen::load_dataset_csv(path, None, None)?;
            if let Some(p) = d.meta.problem {
                if p != cfg.problem {
                    return Err(Error::Config(format!("dataset is for {p}, not {}", cfg.problem)));
                }
            }
            Some(d)
        }
        None => None,
    };
    let mut rows = Vec::new();
    let mut skipped = 0;
    for sim in 0..cfg.sims {
        match run_sim(cfg, graph.as_ref(), loaded.as_ref(), sim) {
            Ok(r) => rows.extend(r),
            Err(Error::Infeasible(msg)) => {
                log::warn!("simulation {sim} skipped: {msg}");
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    let summaries = cfg
        .methods
        .iter()
        .filter_map(|&m| {
            let mine: Vec<&SimRow> = rows.iter().filter(|r| r.method == m).collect();
            let first = mine.first()?;
            let regrets: Vec<f64> = mine.iter().map(|r| r.regret).collect();
            let tovs: Vec<f64> = mine.iter().map(|r| r.true_opt).collect();
            let (mean_regret, std_regret) = mean_std(&regrets);
            let (mean_true_opt, std_true_opt) = mean_std(&tovs);
            Some(Summary {
                method: m,
                problem: first.problem,
                graph: first.graph.clone(),
                n: first.n,
                sims: mine.len(),
                mean_regret,
                std_regret,
                mean_true_opt,
                std_true_opt,
                seconds: mine.iter().map(|r| r.seconds).sum(),
            })
        })
        .collect();
    Ok(Report {
        rows,
        summaries,
        skipped_sims: skipped,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "method", "problem", "graph", "n", "sim", "regret", "true_opt", "seconds",
];

/// One line per simulation and method, then `mean` and `std` lines per
/// method.
pub fn write_report(report: &Report, out: impl Write, format: Format) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in &report.rows {
                w.write_record([
                    r.method.name(),
                    r.problem.name(),
                    &r.graph,
                    &r.n.to_string(),
                    &r.sim.to_string(),
                    &r.regret.to_string(),
                    &r.true_opt.to_string(),
                    &r.seconds.to_string(),
                ])?;
            }
            for s in &report.summaries {
                for (tag, regret, tov, secs) in [
                    ("mean", s.mean_regret, s.mean_true_opt, s.seconds),
                    ("std", s.std_regret, s.std_true_opt, 0.0),
                ] {
                    w.write_record([
                        s.method.name(),
                        s.problem.name(),
                        &s.graph,
                        &s.n.to_string(),
                        tag,
                        &regret.to_string(),
                        &tov.to_string(),
                        &secs.to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn emit_report(report: &Report, path: impl AsRef<Path>, format: Format) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::Config("nothing to report".into()));
    }
    write_report(report, std::fs::File::create(path)?, format)
}
