//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 6 and 8 compare two learning methods on random data; their
//! outcome is an empirical finding, so a FAIL there is reported without
//! failing the run. Set `BNL_STRICT_ACCEPTANCE=1` to make every criterion
//! binding.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bnl_core::datagen::{split, Dataset, DatasetMeta, ProblemKind};
use bnl_core::harness::{self, evaluate, fit, AnyProblem, ExperimentConfig, Format, Method, Report};
use bnl_core::model::{Coefficients, TrainingExample};
use bnl_core::problem::Problem;
use bnl_core::problems::{brute_ks, brute_mcfp, brute_mcvc, brute_spp};
use bnl_core::pwl::{CombineOp, Interval, PwlFunction};
use bnl_core::trainer::{coordinate_descent, Init, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONSISTENCY_TOL: f64 = 1e-6;
const ALGEBRA_TOL: f64 = 1e-9;
const MONOTONE_TOL: f64 = 1e-9;
const RECOVERY_TOL: f64 = 1e-6;
const ORACLE_BUDGET: Duration = Duration::from_secs(5 * 60);
const EXPERIMENT_BUDGET: Duration = Duration::from_secs(30 * 60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = Vec::new();

    let mut ks_ok = 0;
    for _ in 0..1000 {
        let ks = common::knapsack(&mut rng, 12);
        let profits = common::ints(&mut rng, ks.len(), 0, 20);
        let got = ks.solve(&profits).unwrap().objective.value();
        if got == brute_ks(&profits, &ks.costs, ks.budget).unwrap() {
            ks_ok += 1;
        }
    }
    let mut spp_ok = 0;
    for _ in 0..500 {
        let spp = common::shortest_path(&mut rng, 8);
        let costs = common::ints(&mut rng, spp.edges().len(), 0, 10);
        let got = spp.solve(&costs).unwrap().objective;
        let want = brute_spp(
            spp.vertex_count(),
            spp.edges(),
            &costs,
            spp.source(),
            spp.target(),
        )
        .unwrap();
        if got == want {
            spp_ok += 1;
        }
    }
    let mut mcfp_ok = 0;
    for _ in 0..200 {
        let net = common::flow_network(&mut rng, 6);
        let costs = common::ints(&mut rng, net.edges().len(), 0, 10);
        let r = net.solve(&costs).unwrap();
        let got = r.solution.feasible.then(|| r.objective.value());
        if got == brute_mcfp(&net, &costs).unwrap() {
            mcfp_ok += 1;
        }
    }
    let mut mcvc_ok = 0;
    for _ in 0..500 {
        let vc = common::vertex_cover(&mut rng, 12);
        let costs = common::ints(&mut rng, vc.vertex_count(), 0, 20);
        let got = vc.solve(&costs).unwrap().objective.value();
        if got == brute_mcvc(vc.vertex_count(), vc.edges(), &costs).unwrap() {
            mcvc_ok += 1;
        }
    }
    for (name, ok, total) in [
        ("ks", ks_ok, 1000),
        ("spp", spp_ok, 500),
        ("mcfp", mcfp_ok, 200),
        ("mcvc", mcvc_ok, 500),
    ] {
        if ok != total {
            bad.push(format!("{name} {ok}/{total}"));
        }
    }
    let took = start.elapsed();
    Outcome {
        pass: bad.is_empty() && took < ORACLE_BUDGET,
        detail: format!(
            "ks {ks_ok}/1000, spp {spp_ok}/500, mcfp {mcfp_ok}/200, mcvc {mcvc_ok}/500 in {:.1}s",
            took.as_secs_f64()
        ),
    }
}

fn consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut run = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    for _ in 0..50 {
        let p = common::knapsack(&mut rng, 10);
        run("ks", common::check_consistency(&mut rng, &p, 3, 100));
        let p = common::shortest_path(&mut rng, 7);
        run("spp", common::check_consistency(&mut rng, &p, 3, 100));
        let p = common::flow_network(&mut rng, 6);
        run("mcfp", common::check_consistency(&mut rng, &p, 3, 100));
        let p = common::vertex_cover(&mut rng, 8);
        run("mcvc", common::check_consistency(&mut rng, &p, 3, 100));
    }
    Outcome {
        pass: failures.is_empty(),
        detail: match failures.first() {
            None => format!("4 families x 50 instances x 100 points, tol {CONSISTENCY_TOL:e}"),
            Some(f) => format!("{} failures, first: {f}", failures.len()),
        },
    }
}

fn apply(op: CombineOp, a: f64, b: f64) -> f64 {
    match op {
        CombineOp::Add => a + b,
        CombineOp::Sub => a - b,
        CombineOp::Min => a.min(b),
        CombineOp::Max => a.max(b),
    }
}

fn algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let domains = [
        Interval::REAL_LINE,
        Interval::new(-5.0, 7.5).unwrap(),
        Interval::new(0.0, f64::INFINITY).unwrap(),
        Interval::new(f64::NEG_INFINITY, 2.0).unwrap(),
    ];
    let mut checked = 0usize;
    let mut errors = Vec::new();
    for pair in 0..200 {
        let d = domains[pair % domains.len()];
        let f = common::pwl(&mut rng, d, 8);
        let g = common::pwl(&mut rng, d, 8);
        let window = Interval::new(d.lo().max(-60.0), d.hi().min(60.0)).unwrap();
        for op in [CombineOp::Add, CombineOp::Sub, CombineOp::Min, CombineOp::Max] {
            let h: PwlFunction = f.combine(&g, op).unwrap();
            let bound = match op {
                CombineOp::Add | CombineOp::Sub => f.len() + g.len(),
                _ => 2 * (f.len() + g.len()),
            };
            if !h.is_valid() || h.domain() != d {
                errors.push(format!("{op:?}: invalid partition"));
            }
            if h.len() > bound {
                errors.push(format!("{op:?}: {} pieces > {bound}", h.len()));
            }
            for _ in 0..1000 {
                let r = common::point(&mut rng, window);
                let (fv, gv) = (f.evaluate(r).unwrap().0.value(), g.evaluate(r).unwrap().0.value());
                let want = apply(op, fv, gv);
                let got = h.evaluate(r).unwrap().0.value();
                if (got - want).abs() > ALGEBRA_TOL * want.abs().max(1.0) {
                    errors.push(format!("{op:?} at {r}: {got} vs {want}"));
                }
                checked += 1;
            }
        }
    }
    Outcome {
        pass: errors.is_empty(),
        detail: match errors.first() {
            None => format!("200 pairs, {checked} point checks, tol {ALGEBRA_TOL:e}"),
            Some(e) => format!("{} errors, first: {e}", errors.len()),
        },
    }
}

fn nonlinear(rng: &mut dyn rand::RngCore, a: &[f64]) -> f64 {
    let noise: f64 = rng.gen_range(-1.0..1.0);
    10.0 + 3.0 * (a[0] * 2.0).sin() + a[1] * a[2] + noise
}

fn trace_ok(initial: Option<f64>, trace: &[f64]) -> bool {
    let mut prev = initial.unwrap_or(f64::INFINITY);
    for &v in trace {
        if v > prev + MONOTONE_TOL {
            return false;
        }
        prev = v;
    }
    true
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = Vec::new();
    let mut steps = 0;
    for run in 0..20u64 {
        let cfg = TrainConfig {
            init: Init::Random { seed: run },
            ..TrainConfig::default()
        };
        let mut check = |name: &str, r: bnl_core::trainer::TrainReport| {
            steps += r.total_regret_trace.len();
            if !trace_ok(r.initial_regret, &r.total_regret_trace) {
                bad.push(format!("{name} run {run}: {:?}", r.total_regret_trace));
            }
        };
        let p = common::knapsack(&mut rng, 8);
        let d = common::dataset(&mut rng, &p, 15, 3, nonlinear);
        check("ks", coordinate_descent(&[p], &d, &cfg).unwrap());
        let p = loop {
            let p = common::shortest_path(&mut rng, 7);
            if !p.edges().is_empty()
                && p.solve(&vec![1.0; p.edges().len()])
                    .unwrap()
                    .objective
                    .is_finite()
            {
                break p;
            }
        };
        let d = common::dataset(&mut rng, &p, 15, 3, nonlinear);
        check("spp", coordinate_descent(&[p], &d, &cfg).unwrap());
        let p = loop {
            let p = common::flow_network(&mut rng, 6);
            if bnl_core::problems::max_flow(&p) >= p.demand() {
                break p;
            }
        };
        let d = common::dataset(&mut rng, &p, 15, 3, nonlinear);
        check("mcfp", coordinate_descent(&[p], &d, &cfg).unwrap());
        let p = common::vertex_cover(&mut rng, 8);
        let d = common::dataset(&mut rng, &p, 15, 3, nonlinear);
        check("mcvc", coordinate_descent(&[p], &d, &cfg).unwrap());
    }
    Outcome {
        pass: bad.is_empty(),
        detail: match bad.first() {
            None => format!("80 runs, {steps} updates, tol {MONOTONE_TOL:e}"),
            Some(b) => format!("{} runs increase, first: {b}", bad.len()),
        },
    }
}

fn linear_dataset(rng: &mut ChaCha8Rng, p: &AnyProblem, n: usize, star: &Coefficients) -> Dataset {
    let t = p.param_count();
    let m = star.len();
    let examples = (0..n)
        .map(|_| {
            let a = common::features(rng, t, m);
            let truth = a.mul_vec(star).unwrap();
            TrainingExample::new(a, truth).unwrap()
        })
        .collect();
    Dataset::new(
        examples,
        DatasetMeta {
            m,
            t,
            ..DatasetMeta::default()
        },
    )
    .unwrap()
}

fn exact_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let star = Coefficients(vec![1.5, 0.25, 2.0]);
    let spp = loop {
        let p = common::shortest_path(&mut rng, 7);
        if p.edges().len() >= 3
            && p.solve(&vec![1.0; p.edges().len()])
                .unwrap()
                .objective
                .is_finite()
        {
            break p;
        }
    };
    let mcfp = loop {
        let p = common::flow_network(&mut rng, 6);
        if bnl_core::problems::max_flow(&p) >= p.demand() {
            break p;
        }
    };
    let problems = [
        ("ks", AnyProblem::Ks(common::knapsack(&mut rng, 10))),
        ("spp", AnyProblem::Spp(spp)),
        ("mcfp", AnyProblem::Mcfp(mcfp)),
        ("mcvc", AnyProblem::Mcvc(common::vertex_cover(&mut rng, 8))),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, p) in &problems {
        let d = linear_dataset(&mut rng, p, 40, &star);
        let (train, test) = split(&d, 0.7, 11).unwrap();
        for method in [Method::Bnl, Method::Lr] {
            let alpha = fit(method, p, &train, &TrainConfig::default()).unwrap();
            let (regret, _) = evaluate(p, &alpha, &test).unwrap();
            worst = worst.max(regret);
            parts.push(format!("{name}/{method} {regret:.1e}"));
        }
    }
    Outcome {
        pass: worst <= RECOVERY_TOL,
        detail: format!(
            "max test regret {worst:.2e} (tol {RECOVERY_TOL:e}): {}",
            parts.join(", ")
        ),
    }
}

fn summary(report: &Report, m: Method) -> (f64, f64) {
    let s = report.summaries.iter().find(|s| s.method == m).unwrap();
    (s.mean_regret, s.std_regret)
}

fn directional(problem: ProblemKind, graph: &str, sims: usize) -> Outcome {
    let cfg = ExperimentConfig {
        problem,
        graph: Some(graph.into()),
        n: 100,
        sims,
        seed: 0,
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let report = harness::run_experiment(&cfg).unwrap();
    let took = start.elapsed();
    let (bnl, bnl_sd) = summary(&report, Method::Bnl);
    let (lr, lr_sd) = summary(&report, Method::Lr);
    let nonneg = report.rows.iter().all(|r| r.regret >= 0.0);
    let complete = report.rows.len() == 2 * sims;
    Outcome {
        pass: nonneg && complete && bnl <= lr && took < EXPERIMENT_BUDGET,
        detail: format!(
            "{problem} on {graph}, n=100, {sims} sims: bnl {bnl:.2}±{bnl_sd:.2}, lr {lr:.2}±{lr_sd:.2}, \
             all regrets >= 0: {nonneg}, {} skipped, {:.1}s",
            report.skipped_sims,
            took.as_secs_f64()
        ),
    }
}

fn report_csv(cfg: &ExperimentConfig) -> Vec<u8> {
    let mut buf = Vec::new();
    harness::write_report(&harness::run_experiment(cfg).unwrap(), &mut buf, Format::Csv).unwrap();
    buf
}

fn determinism() -> Outcome {
    let configs = [
        ExperimentConfig {
            problem: ProblemKind::Mcvc,
            n: 40,
            sims: 2,
            seed: 7,
            ..ExperimentConfig::default()
        },
        ExperimentConfig {
            problem: ProblemKind::Mcfp,
            n: 30,
            sims: 2,
            seed: 7,
            ..ExperimentConfig::default()
        },
        ExperimentConfig {
            problem: ProblemKind::Ks,
            n: 30,
            sims: 2,
            seed: 7,
            ..ExperimentConfig::default()
        },
        ExperimentConfig {
            problem: ProblemKind::Spp,
            n: 30,
            sims: 2,
            seed: 7,
            ..ExperimentConfig::default()
        },
    ];
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut same = 0;
    for cfg in &configs {
        let a = report_csv(cfg);
        let b = report_csv(cfg);
        let c = single.install(|| report_csv(cfg));
        if a == b && a == c {
            same += 1;
        }
    }
    Outcome {
        pass: same == configs.len(),
        detail: format!(
            "{same}/{} configurations byte-identical across reruns and thread counts",
            configs.len()
        ),
    }
}

/// Number, name, whether it decides the exit code, and the check.
type Criterion = (u8, &'static str, bool, fn() -> Outcome);

fn main() -> ExitCode {
    let strict = std::env::var_os("BNL_STRICT_ACCEPTANCE").is_some_and(|v| v != "0");
    let criteria: [Criterion; 8] = [
        (1, "oracle equivalence", true, oracles),
        (2, "relearn/resolve consistency", true, consistency),
        (3, "piecewise-linear algebra", true, algebra),
        (4, "coordinate-descent monotonicity", true, monotonicity),
        (5, "exact recovery on linear truth", true, exact_recovery),
        (6, "mcvc polska: bnl <= lr", false, || {
            directional(ProblemKind::Mcvc, "polska", 10)
        }),
        (7, "determinism", true, determinism),
        (8, "mcfp usanet: bnl <= lr", false, || {
            directional(ProblemKind::Mcfp, "usanet", 5)
        }),
    ];
    let mut failed_binding = 0;
    for (id, name, binding, run) in criteria {
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        let note = if !out.pass && !binding && !strict {
            " (empirical, not binding)"
        } else {
            ""
        };
        println!("[{verdict}] criterion {id}: {name}: {}{note}", out.detail);
        if !out.pass && (binding || strict) {
            failed_binding += 1;
        }
    }
    if failed_binding > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
