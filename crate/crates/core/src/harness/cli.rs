use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{load_config, OutputFormat};
use super::experiment::{evaluate_checks, run_experiment};
use super::output::{read_trace_rows, trace_table, traces_from_rows};
use super::plots::{write_noise_plot, write_trace_plot};
use super::probes::{chain_check, lemma_check, lowerbound_check, noise_probe, sandwich_probe, ProbeOutput};
use super::problem::build_problem;
use super::report::Report;
use crate::diagnostics::{fit_loglog_slope, seed_mean, Metric, RmsPropParams};
use crate::error::{Error, Result};
use crate::noise::{NoiseFamily, NoiseSpec, DEFAULT_BLOCK_SIZE};

/// Exit status: every check passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status: the run completed but a check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit status: configuration, I/O or runtime error.
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "heavyclip", version, about = "Clipped SGD under heavy-tailed noise: experiments and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed (overrides the config's `seeds.master`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "HEAVYCLIP_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
    /// Data file format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "HEAVYCLIP_THREADS")]
    pub threads: Option<usize>,
    /// Also write a matplotlib script for the data.
    #[arg(long)]
    pub plots: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run an experiment file.
    Run {
        config: PathBuf,
        /// `dotted.key=value` override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Number of seeds.
        #[arg(long)]
        seeds: Option<u64>,
        /// Iteration budget.
        #[arg(long, value_parser = parse_count)]
        iterations: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Histogram, running second moment and tail index of a noise family.
    NoiseProbe {
        #[arg(long, default_value = "stable")]
        family: NoiseFamily,
        /// Tail index of the family.
        #[arg(long, default_value_t = 1.5)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 1)]
        dimension: usize,
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_BLOCK_SIZE)]
        block: usize,
        #[arg(long, default_value_t = 60)]
        bins: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Bias–variance probes of global clipping over a threshold grid.
    LemmaCheck {
        #[arg(long, default_value = "stable")]
        family: NoiseFamily,
        #[arg(long, default_value_t = 1.55)]
        a: f64,
        /// Moment exponent of the bounds.
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 1)]
        dimension: usize,
        /// True gradient, broadcast to every coordinate.
        #[arg(long, default_value_t = 1.0)]
        grad: f64,
        #[arg(long, value_delimiter = ',', default_value = "2,5,10,20,50")]
        taus: Vec<f64>,
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        n: u64,
        /// Standard errors of slack.
        #[arg(long, default_value_t = 3.0)]
        z: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Monte-Carlo validation of the lower-bound oracle.
    Lowerbound {
        #[arg(long, value_delimiter = ',', default_value = "0.125,0.0625")]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1.5,2")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.125,0.25,0.375,0.5")]
        points: Vec<f64>,
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        n: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Numerical property suite of the zero-chain instance.
    ChainCheck {
        #[arg(long, default_value_t = 20)]
        d: usize,
        #[arg(long, value_parser = parse_count, default_value = "1e5")]
        points: u64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Oracle draws per unbiasedness test point.
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        draws: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Fuzz the RMSProp / clipped-SGD step-size band.
    Sandwich {
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        fuzz: u64,
        #[arg(long, default_value_t = 1e-3)]
        a: f64,
        #[arg(long, default_value_t = 0.99)]
        beta2: f64,
        #[arg(long, default_value_t = 1e-8)]
        epsilon: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Re-render a report from a trace file, optionally re-running a
    /// config's checks against it.
    Report {
        /// Trace file written by `run` (CSV or JSON lines).
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

/// Accepts integers written as `100000`, `1e5` or `1_000`.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let clean = s.replace('_', "");
    if let Ok(v) = clean.parse::<u64>() {
        return Ok(v);
    }
    match clean.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("`{s}` is not a nonnegative integer")),
    }
}

/// Parses arguments, executes, and returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn file(common: &Common, stem: &str, format: OutputFormat) -> PathBuf {
    common.out.join(format!("{stem}.{}", format.extension()))
}

fn finish(report: &Report, common: &Common, stem: &str) -> Result<bool> {
    report.write(&common.out.join(stem))?;
    print!("{}", report.render_text());
    Ok(report.all_passed())
}

fn emit_probe(out: ProbeOutput, common: &Common, stem: &str) -> Result<(Vec<PathBuf>, bool)> {
    let format = common.format.unwrap_or_default();
    std::fs::create_dir_all(&common.out)?;
    let mut paths = Vec::new();
    for t in &out.tables {
        let p = file(common, &format!("{stem}_{}", t.name), format);
        t.write(&p, format)?;
        paths.push(p);
    }
    let ok = finish(&out.report, common, &format!("{stem}_report"))?;
    Ok((paths, ok))
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run {
            config,
            mut overrides,
            seeds,
            iterations,
            common,
        } => {
            if let Some(s) = common.seed {
                overrides.push(format!("seeds.master={s}"));
            }
            if let Some(n) = seeds {
                overrides.push(format!("seeds.count={n}"));
            }
            if let Some(k) = iterations {
                overrides.push(format!("optimizer.iterations={k}"));
            }
            let cfg = load_config(&config, &overrides)?;
            let outcome = run_experiment(&cfg, common.threads)?;
            let format = common.format.unwrap_or(cfg.outputs.format);
            std::fs::create_dir_all(&common.out)?;
            let data = match &cfg.outputs.csv {
                Some(p) => common.out.join(p),
                None => file(&common, &cfg.name, format),
            };
            trace_table(&cfg.name, &outcome.traces).write(&data, format)?;
            if cfg.outputs.plots || common.plots {
                write_trace_plot(&data)?;
            }
            let stem = cfg.outputs.report.clone().unwrap_or_else(|| format!("{}_report", cfg.name));
            finish(&outcome.report, &common, &stem)
        }
        Command::NoiseProbe {
            family,
            a,
            scale,
            dimension,
            n,
            block,
            bins,
            common,
        } => {
            let spec = NoiseSpec::new(family, a, scale, dimension);
            let out = noise_probe(&spec, n as usize, block, bins, common.seed.unwrap_or(0))?;
            let (paths, ok) = emit_probe(out, &common, "noise_probe")?;
            if common.plots {
                write_noise_plot(&common.out, &paths[0], &paths[1])?;
            }
            Ok(ok)
        }
        Command::LemmaCheck {
            family,
            a,
            alpha,
            scale,
            dimension,
            grad,
            taus,
            n,
            z,
            common,
        } => {
            let spec = NoiseSpec::new(family, a, scale, dimension);
            let out = lemma_check(&spec, &vec![grad; dimension], &taus, alpha, n as usize, z, common.seed.unwrap_or(0))?;
            Ok(emit_probe(out, &common, "lemma_check")?.1)
        }
        Command::Lowerbound {
            eps,
            alpha,
            points,
            n,
            common,
        } => {
            let out = lowerbound_check(&eps, &alpha, &points, n as usize, common.seed.unwrap_or(0))?;
            Ok(emit_probe(out, &common, "lowerbound")?.1)
        }
        Command::ChainCheck {
            d,
            points,
            p,
            draws,
            common,
        } => {
            let out = chain_check(d, points as usize, p, draws as usize, common.seed.unwrap_or(0))?;
            Ok(emit_probe(out, &common, "chain_check")?.1)
        }
        Command::Sandwich {
            fuzz,
            a,
            beta2,
            epsilon,
            common,
        } => {
            let out = sandwich_probe(fuzz, RmsPropParams { a, beta2, epsilon }, common.seed.unwrap_or(0))?;
            Ok(emit_probe(out, &common, "sandwich")?.1)
        }
        Command::Report {
            data,
            config,
            overrides,
            common,
        } => rerender(&data, config.as_deref(), &overrides, &common),
    }
}

fn rerender(data: &Path, config: Option<&Path>, overrides: &[String], common: &Common) -> Result<bool> {
    let rows = read_trace_rows(data)?;
    let groups = traces_from_rows(&rows);
    let mut report = Report::new(format!("report for {}", data.display()), common.seed.unwrap_or(0));
    let mut keys: Vec<(String, String)> = Vec::new();
    for (e, t) in &groups {
        let key = (e.clone(), t.algorithm.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    for (exp, alg) in &keys {
        let traces: Vec<_> = groups
            .iter()
            .filter(|(e, t)| e == exp && &t.algorithm == alg)
            .map(|(_, t)| t.clone())
            .collect();
        report.fact(format!("{exp}/{alg} seeds"), traces.len());
        for metric in [Metric::Suboptimality, Metric::MinGradStat] {
            let Ok(curve) = seed_mean(&traces, metric) else { continue };
            let pts = curve.as_f64();
            let (Some(lo), Some(hi)) = (pts.first(), pts.last()) else { continue };
            if let Ok(fit) = fit_loglog_slope(&pts, (lo.0.max(10.0), hi.0)) {
                report.fact(
                    format!("{exp}/{alg} {} slope", metric.name()),
                    format!("{:.4} (r^2 {:.4}, {} points)", fit.slope, fit.r_squared, fit.n_points),
                );
            }
        }
    }
    if let Some(path) = config {
        let mut ov = overrides.to_vec();
        if let Some(s) = common.seed {
            ov.push(format!("seeds.master={s}"));
        }
        let cfg = load_config(path, &ov)?;
        report.master_seed = cfg.seeds.master;
        let traces: Vec<_> = groups
            .into_iter()
            .filter(|(e, _)| *e == cfg.name)
            .map(|(_, t)| t)
            .collect();
        if traces.is_empty() {
            return Err(Error::Config(format!("no rows for experiment `{}` in {}", cfg.name, data.display())));
        }
        let (problem, cal) = build_problem(&cfg, cfg.seeds.master)?;
        report.verdicts = evaluate_checks(&cfg, &problem, &cal, &traces, &mut report.facts)?;
    }
    std::fs::create_dir_all(&common.out)?;
    finish(&report, common, "report")
}
