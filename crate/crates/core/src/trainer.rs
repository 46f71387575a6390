//! Coordinate descent on the total training regret.
//!
//! Each update frees one coefficient, computes the exact piecewise-constant
//! total regret as a function of it, and moves the coefficient to a
//! minimizer.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::fit_least_squares;
use crate::error::{Error, Result};
use crate::model::{Coefficients, TrainingExample};
use crate::problem::{construct, evaluate_regret, Problem};
use crate::pwl::{ExtReal, Interval, LinearFn, PwlFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Zeros,
    /// Uniform on `[-1, 1]`.
    Random {
        seed: u64,
    },
    LeastSquares,
    Fixed(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Full passes over the coefficients.
    pub max_epochs: usize,
    /// Stop when an epoch improves the total regret by at most this
    /// fraction.
    pub tol: f64,
    /// Regret charged where an estimate leaves the admissible domain.
    pub big_m: f64,
    pub init: Init,
    #[serde(with = "opt_secs")]
    pub time_budget: Option<Duration>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 5,
            tol: 1e-6,
            big_m: 1e12,
            init: Init::LeastSquares,
            time_budget: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config("tol must be positive".into()));
        }
        if !(self.big_m.is_finite() && self.big_m > 0.0) {
            return Err(Error::Config("big_m must be positive and finite".into()));
        }
        Ok(())
    }
}

mod opt_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        let secs = Option::<f64>::deserialize(d)?;
        secs.map(|s| Duration::try_from_secs_f64(s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub alpha: Coefficients,
    /// Total regret at the starting point.
    pub initial_regret: Option<f64>,
    /// Total training regret after every coordinate update.
    pub total_regret_trace: Vec<f64>,
    /// Coefficient updated at each step, 0-based.
    pub coordinates: Vec<usize>,
    pub epochs_run: usize,
    /// (example, coordinate) pairs without an admissible value.
    pub skipped_examples: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Initial coefficients for `data` under `init`.
pub fn initial_alpha(init: &Init, data: &[TrainingExample]) -> Result<Coefficients> {
    let m = data
        .first()
        .ok_or_else(|| Error::Dimension("no training examples".into()))?
        .features
        .cols();
    Ok(match init {
        Init::Zeros => Coefficients::zeros(m),
        Init::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Coefficients((0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        }
        Init::LeastSquares => fit_least_squares(data)?.alpha,
        Init::Fixed(v) => {
            if v.len() != m {
                return Err(Error::Dimension(format!(
                    "{} initial values for {m} features",
                    v.len()
                )));
            }
            Coefficients(v.clone())
        }
    })
}

/// Minimizes the total training regret over α by cyclic coordinate updates.
///
/// `instances` holds either one problem shared by every example or one per
/// example.
pub fn coordinate_descent<P: Problem>(
    instances: &[P],
    data: &[TrainingExample],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Dimension("no training examples".into()));
    }
    if instances.len() != 1 && instances.len() != data.len() {
        return Err(Error::Dimension(format!(
            "{} instances for {} examples",
            instances.len(),
            data.len()
        )));
    }
    let instance = |i: usize| {
        if instances.len() == 1 {
            &instances[0]
        } else {
            &instances[i]
        }
    };
    let m = data[0].features.cols();
    for (i, ex) in data.iter().enumerate() {
        if ex.features.cols() != m || ex.truth.len() != instance(i).param_count() {
            return Err(Error::Dimension(format!(
                "example {i} has inconsistent dimensions"
            )));
        }
    }

    let start = Instant::now();
    let true_opt = data
        .par_iter()
        .enumerate()
        .map(|(i, ex)| {
            let r = instance(i).solve(&ex.truth)?;
            if !r.objective.is_finite() || !instance(i).is_feasible(&r.solution) {
                return Err(Error::Infeasible(format!("example {i} has no feasible solution")));
            }
            Ok(r.objective.value())
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut alpha = initial_alpha(&cfg.init, data)?;
    let mut report = TrainReport {
        alpha: alpha.clone(),
        initial_regret: None,
        total_regret_trace: Vec::new(),
        coordinates: Vec::new(),
        epochs_run: 0,
        skipped_examples: 0,
        converged: false,
        warnings: Vec::new(),
    };
    let out_of_time = || cfg.time_budget.is_some_and(|b| start.elapsed() >= b);

    'epochs: for _ in 0..cfg.max_epochs {
        let epoch_start = report.total_regret_trace.last().copied();
        for k in 0..m {
            if out_of_time() {
                report.warnings.push("time budget exhausted".into());
                break 'epochs;
            }
            if k == 0 {
                report.epochs_run += 1;
            }
            let (loss, skipped) = total_regret(instances, data, &true_opt, &alpha, k, cfg.big_m)?;
            report.skipped_examples += skipped;
            if report.initial_regret.is_none() {
                report.initial_regret = Some(loss.evaluate(alpha[k])?.0.value());
            }
            if skipped == data.len() {
                report.warnings.push(format!(
                    "coordinate {k}: every example skipped, coefficient left unchanged"
                ));
            } else {
                alpha.0[k] = choose(&loss, alpha[k])?;
            }
            report.total_regret_trace.push(loss.evaluate(alpha[k])?.0.value());
            report.coordinates.push(k);
        }
        let end = *report.total_regret_trace.last().unwrap();
        let before = epoch_start.or(report.initial_regret).unwrap_or(end);
        if end == 0.0 || before - end <= cfg.tol * before.abs().max(f64::MIN_POSITIVE) {
            report.converged = true;
            break;
        }
    }
    report.alpha = alpha;
    Ok(report)
}

/// Σ_i regret_i(γ) for coordinate `k`, and the number of skipped examples.
/// Skipped examples contribute the constant `big_m`, the same charge an
/// inadmissible γ gets, so the total stays comparable across coordinates.
pub fn total_regret<P: Problem>(
    instances: &[P],
    data: &[TrainingExample],
    true_opt: &[f64],
    alpha: &Coefficients,
    k: usize,
    big_m: f64,
) -> Result<(PwlFunction, usize)> {
    let instance = |i: usize| {
        if instances.len() == 1 {
            &instances[0]
        } else {
            &instances[i]
        }
    };
    let per_example = data
        .par_iter()
        .enumerate()
        .map(|(i, ex)| {
            let p = instance(i);
            match construct(p, &ex.features, &ex.truth, alpha, k)? {
                None => Ok(None),
                Some((params, domain)) => {
                    let e = p.relearn(&params, domain)?;
                    evaluate_regret(&e, true_opt[i], domain, p.sense(), big_m).map(Some)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total = PwlFunction::zero(Interval::REAL_LINE);
    let mut skipped = 0;
    for f in per_example {
        total = match f {
            Some(f) => total.combine(&f, crate::pwl::CombineOp::Add)?,
            None => {
                skipped += 1;
                total.add_linear(&LinearFn::constant(big_m), ExtReal::from(big_m))?
            }
        };
    }
    Ok((total.simplify(), skipped))
}

/// The new value of a coefficient currently at `current`. A current value
/// strictly inside a minimal piece is kept; otherwise the interior point of
/// the leftmost minimal piece is taken.
fn choose(loss: &PwlFunction, current: f64) -> Result<f64> {
    let (gamma, best) = loss.argmin_piecewise()?;
    let here = &loss.pieces()[loss.piece_index(current)?];
    let inside = here.interval.lo() < current && current < here.interval.hi();
    if inside && here.est.intercept() == best {
        Ok(current)
    } else {
        Ok(gamma)
    }
}
