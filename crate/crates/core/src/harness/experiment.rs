use std::time::Instant;

use rayon::prelude::*;

use super::config::{Aggregate, BoundKind, CheckSpec, ExperimentConfig};
use super::problem::{build_problem, BuiltProblem, Calibration};
use super::report::{Report, Verdict};
use crate::diagnostics::{bound_envelope_check, fit_loglog_slope, seed_mean, seed_median, RateBound, SeedCurve};
use crate::error::{config, Error, Result};
use crate::optim::{run, Trace};
use crate::problems::StochasticProblem;
use crate::rng::Seed;

pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub problem: BuiltProblem,
    pub calibration: Calibration,
    pub traces: Vec<Trace>,
    pub report: Report,
}

/// Runs every seed of the experiment and evaluates its checks.
///
/// Run `i` uses stream `i` of the master seed, so adding seeds leaves
/// earlier runs unchanged. `threads = None` uses rayon's default pool.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let master = cfg.seeds.master;
    let (problem, calibration) = build_problem(cfg, master)?;
    let work = || -> Result<Vec<Trace>> {
        (0..cfg.seeds.count)
            .into_par_iter()
            .map(|i| run(&problem, &cfg.optimizer, Seed::fan_out(master, i)))
            .collect()
    };
    let traces = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut report = Report::new(format!("experiment {}", cfg.name), master);
    report.fact("problem", problem.id());
    report.fact("algorithm", cfg.optimizer.algorithm.label());
    if let Some(t) = traces.first() {
        report.fact("schedule", &t.schedule);
    }
    report.fact("seeds", cfg.seeds.count);
    report.fact("iterations", cfg.optimizer.iterations);
    if let Some(a) = calibration.alpha {
        report.fact("calibration alpha", a);
    }
    if let Some(g) = calibration.g {
        report.fact("G", g);
    }
    if let Some(s) = calibration.sigma {
        report.fact("sigma", s);
    }
    if let Some(b) = &calibration.coordinate_bounds {
        let norm: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        report.fact("||B||_2", norm);
    }
    report.verdicts = evaluate_checks(cfg, &problem, &calibration, &traces, &mut report.facts)?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(ExperimentOutcome {
        config: cfg.clone(),
        problem,
        calibration,
        traces,
        report,
    })
}

fn curve(traces: &[Trace], metric: crate::diagnostics::Metric, agg: Aggregate) -> Result<SeedCurve> {
    match agg {
        Aggregate::Mean => seed_mean(traces, metric),
        Aggregate::Median => seed_median(traces, metric),
    }
}

/// Evaluates the declared checks against `traces`; fitted quantities are
/// appended to `facts`.
pub fn evaluate_checks(
    cfg: &ExperimentConfig,
    problem: &BuiltProblem,
    calibration: &Calibration,
    traces: &[Trace],
    facts: &mut Vec<(String, String)>,
) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    for check in &cfg.checks {
        let id = check.id();
        let v = match check {
            CheckSpec::Slope {
                metric,
                aggregate,
                k_min,
                k_max,
                expected,
                tolerance,
                below,
                ..
            } => {
                let c = curve(traces, *metric, *aggregate)?;
                let fit = fit_loglog_slope(&c.as_f64(), (*k_min, *k_max))?;
                facts.push((
                    format!("{id} slope fit"),
                    format!(
                        "slope {:.4}, r^2 {:.4}, {} points over [{}, {}]",
                        fit.slope, fit.r_squared, fit.n_points, fit.k_range.0, fit.k_range.1
                    ),
                ));
                let mut passed = true;
                let mut cond = Vec::new();
                if let (Some(e), Some(t)) = (expected, tolerance) {
                    passed &= (fit.slope - e).abs() <= *t;
                    cond.push(format!("|slope - ({e:.4})| <= {t}"));
                }
                if let Some(b) = below {
                    passed &= fit.slope < *b;
                    cond.push(format!("slope < {b}"));
                }
                Verdict::new(id, &cfg.name, "slope", passed, fit.slope, cond.join(" and "))
                    .with_detail(format!("{} of {}", aggregate_name(*aggregate), metric.name()))
            }
            CheckSpec::Envelope { bound, metric, k_min, .. } => {
                let mu = problem
                    .constants()
                    .strong_convexity
                    .ok_or(Error::MissingConstant("mu"))?;
                let alpha = calibration.alpha.ok_or(Error::MissingConstant("alpha"))?;
                let rb = match bound {
                    BoundKind::Theorem2 => RateBound::theorem2(calibration.g.ok_or(Error::MissingConstant("G"))?, mu, alpha)?,
                    BoundKind::Cclip => RateBound::cclip(
                        calibration
                            .coordinate_bounds
                            .as_deref()
                            .ok_or(Error::MissingConstant("B"))?,
                        mu,
                        alpha,
                    )?,
                };
                let c = seed_mean(traces, *metric)?;
                let r = bound_envelope_check(&c.points, |k| rb.eval(k), *k_min);
                let detail = if r.passed() {
                    format!("{} recorded steps checked", r.checked)
                } else {
                    format!("violations at k = {:?}", r.violations)
                };
                Verdict::new(
                    id,
                    &cfg.name,
                    "envelope",
                    r.passed(),
                    r.max_excess,
                    format!("mean {} <= {:.4}/(mu (k+1)^{:.4}) for k >= {k_min}", metric.name(), rb.constant, rb.exponent),
                )
                .with_detail(detail)
            }
            CheckSpec::Ratio {
                metric,
                aggregate,
                numerator_k,
                denominator_k,
                above,
                at_least,
                at_most,
                ..
            } => {
                let c = curve(traces, *metric, *aggregate)?;
                let at = |k: u64| {
                    c.at(k)
                        .ok_or_else(|| Error::Config(format!("check `{id}`: step {k} was not recorded")))
                };
                let ratio = at(*numerator_k)? / at(*denominator_k)?;
                let mut passed = ratio.is_finite();
                let mut cond = Vec::new();
                if let Some(a) = above {
                    passed &= ratio > *a;
                    cond.push(format!("ratio > {a}"));
                }
                if let Some(a) = at_least {
                    passed &= ratio >= *a;
                    cond.push(format!("ratio >= {a}"));
                }
                if let Some(a) = at_most {
                    passed &= ratio <= *a;
                    cond.push(format!("ratio <= {a}"));
                }
                if cond.is_empty() {
                    return config(format!("ratio check `{id}` declares no limit"));
                }
                Verdict::new(id, &cfg.name, "ratio", passed, ratio, cond.join(" and ")).with_detail(format!(
                    "{} of {} at k={numerator_k} over k={denominator_k}",
                    aggregate_name(*aggregate),
                    metric.name()
                ))
            }
        };
        out.push(v);
    }
    Ok(out)
}

fn aggregate_name(a: Aggregate) -> &'static str {
    match a {
        Aggregate::Mean => "seed mean",
        Aggregate::Median => "seed median",
    }
}
