use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bnl_core::datagen::{self, Angle, Dataset, ProblemKind};
use bnl_core::harness::{
    self, build_instance, evaluate, fit, load_graph, ExperimentConfig, Format, Method, SimSeeds,
};
use bnl_core::model::Coefficients;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(
    name = "bnl",
    version,
    about = "Regret-minimizing linear models for combinatorial problems"
)]
struct Cli {
    /// TOML file with experiment settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset for an instance.
    GenData(Common),
    /// Fit models on a dataset and write their coefficients.
    Train(Common),
    /// Report mean regret of stored models on a dataset.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Model file written by `train`.
        #[arg(long)]
        model: PathBuf,
    },
    /// Run repeated split/train/test simulations.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Record wall time per method.
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Args, Default)]
struct Common {
    /// ks, spp, mcfp or mcvc.
    #[arg(long)]
    problem: Option<ProblemKind>,
    /// Bundled graph (polska, pdh, usanet, geant) or a graph CSV.
    #[arg(long)]
    graph: Option<String>,
    /// Knapsack instance file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Dataset CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    sims: Option<usize>,
    /// Comma-separated subset of bnl,lr.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "big-m")]
    big_m: Option<f64>,
    /// Use degrees in the synthetic truth formula.
    #[arg(long)]
    degrees: bool,
    /// Use the per-graph fixed source and sink.
    #[arg(long)]
    fixed_terminals: bool,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<Format>,
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(p) = self.problem {
            cfg.problem = p;
        }
        if let Some(g) = &self.graph {
            cfg.graph = Some(g.clone());
        }
        if let Some(i) = &self.instance {
            cfg.instance = Some(i.clone());
        }
        if let Some(d) = &self.data {
            cfg.data = Some(d.clone());
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(s) = self.sims {
            cfg.sims = s;
        }
        if let Some(m) = &self.methods {
            cfg.methods = m.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(e) = self.epochs {
            cfg.train.max_epochs = e;
        }
        if let Some(t) = self.tol {
            cfg.train.tol = t;
        }
        if let Some(b) = self.big_m {
            cfg.train.big_m = b;
        }
        if self.degrees {
            cfg.angle = Angle::Degrees;
        }
        if self.fixed_terminals {
            cfg.fixed_terminals = true;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    problem: ProblemKind,
    graph: String,
    seed: u64,
    models: Vec<Model>,
}

#[derive(Serialize, Deserialize)]
struct Model {
    method: Method,
    alpha: Coefficients,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// The dataset and instance a train or eval command works on. Without a
/// data file the dataset is generated exactly as `gen-data` would.
fn dataset_and_instance(cfg: &mut ExperimentConfig) -> Result<(Dataset, harness::AnyProblem)> {
    let data = match &cfg.data {
        Some(p) => Some(datagen::load_dataset_csv(p, None, None)?),
        None => None,
    };
    if let Some(d) = &data {
        if let Some(p) = d.meta.problem {
            cfg.problem = p;
        }
        if cfg.graph.is_none() {
            cfg.graph = d.meta.graph.clone();
        }
        if let Some(s) = d.meta.seed {
            cfg.seed = s;
        }
    }
    cfg.validate()?;
    let seeds = SimSeeds::new(cfg.seed);
    let graph = load_graph(cfg)?;
    let problem = build_instance(cfg, graph.as_ref(), seeds.instance)?;
    let data = match data {
        Some(d) => d,
        None => generate(cfg, &problem, seeds)?,
    };
    if data.meta.t != problem.param_count() {
        bail!(
            "dataset has {} parameters per example but the instance has {}",
            data.meta.t,
            problem.param_count()
        );
    }
    Ok((data, problem))
}

fn generate(cfg: &ExperimentConfig, problem: &harness::AnyProblem, seeds: SimSeeds) -> Result<Dataset> {
    let mut d = datagen::gen_artificial(problem.param_count(), cfg.n, cfg.offset, seeds.data, cfg.angle)?;
    d.meta.problem = Some(cfg.problem);
    d.meta.graph = (cfg.problem != ProblemKind::Ks).then(|| cfg.graph_id());
    d.meta.seed = Some(cfg.seed);
    Ok(d)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::GenData(c) => {
            c.apply(&mut cfg);
            cfg.data = None;
            cfg.validate()?;
            let seeds = SimSeeds::new(cfg.seed);
            let graph = load_graph(&cfg)?;
            let problem = build_instance(&cfg, graph.as_ref(), seeds.instance)?;
            let d = generate(&cfg, &problem, seeds)?;
            datagen::write_dataset(&d, output(c.out.as_deref())?)?;
        }
        Command::Train(c) => {
            c.apply(&mut cfg);
            let (data, problem) = dataset_and_instance(&mut cfg)?;
            let mut models = Vec::new();
            for &method in &cfg.methods {
                let alpha = fit(method, &problem, &data, &cfg.train)?;
                models.push(Model { method, alpha });
            }
            let file = ModelFile {
                problem: cfg.problem,
                graph: cfg.graph_id(),
                seed: cfg.seed,
                models,
            };
            let mut out = output(c.out.as_deref())?;
            serde_json::to_writer_pretty(&mut out, &file)?;
            writeln!(out)?;
        }
        Command::Eval { common, model } => {
            common.apply(&mut cfg);
            let text = fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
            let file: ModelFile = serde_json::from_str(&text).context("parsing model file")?;
            cfg.problem = file.problem;
            if cfg.graph.is_none() && file.problem != ProblemKind::Ks {
                cfg.graph = Some(file.graph.clone());
            }
            if common.seed.is_none() {
                cfg.seed = file.seed;
            }
            let (data, problem) = dataset_and_instance(&mut cfg)?;
            let mut out = output(common.out.as_deref())?;
            writeln!(out, "method,regret,true_opt")?;
            for m in &file.models {
                let (regret, tov) = evaluate(&problem, &m.alpha, &data)?;
                writeln!(out, "{},{regret},{tov}", m.method)?;
            }
        }
        Command::Bench { common, timing } => {
            common.apply(&mut cfg);
            cfg.timing |= timing;
            let report = harness::run_experiment(&cfg)?;
            if report.skipped_sims > 0 {
                log::warn!("{} simulations skipped", report.skipped_sims);
            }
            if report.rows.is_empty() {
                bail!("every simulation was skipped");
            }
            let format = common.format.unwrap_or_default();
            harness::write_report(&report, output(common.out.as_deref())?, format)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
