//! Experiment files.
//!
//! An experiment is one TOML document. A top-level `include = "base.toml"`
//! (or a list of paths) merges other files underneath the current one:
//! tables merge key by key, and the including file wins on conflicts.
//! Include paths resolve relative to the including file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::Metric;
use crate::error::{config, Error, Result};
use crate::noise::{NoiseFamily, NoiseSpec};
use crate::optim::{Algorithm, OptimizerConfig, ScheduleSpec};
use crate::problems::Domain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemConfig,
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub seeds: SeedsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationConfig>,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckSpec>,
}

/// A scalar broadcast to every coordinate, or an explicit vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FillOrVec {
    Fill(f64),
    Vec(Vec<f64>),
}

impl FillOrVec {
    pub fn expand(&self, d: usize) -> Result<Vec<f64>> {
        match self {
            FillOrVec::Fill(v) => Ok(vec![*v; d]),
            FillOrVec::Vec(v) if v.len() == d => Ok(v.clone()),
            FillOrVec::Vec(v) => Err(Error::DimensionMismatch {
                expected: d,
                got: v.len(),
            }),
        }
    }
}

impl Default for FillOrVec {
    fn default() -> Self {
        FillOrVec::Fill(0.0)
    }
}

/// Noise description without its dimension, which comes from the problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub family: NoiseFamily,
    #[serde(default = "two")]
    pub tail_index: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_coordinate_scales: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

impl NoiseConfig {
    pub fn spec(&self, dimension: usize) -> NoiseSpec {
        let mut s = NoiseSpec::new(self.family, self.tail_index, self.scale, dimension);
        s.per_coordinate_scales = self.per_coordinate_scales.clone();
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// `(μ/2)‖x − x*‖²` plus additive noise.
    Quadratic {
        mu: f64,
        dimension: usize,
        #[serde(default)]
        x_star: FillOrVec,
        noise: NoiseConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<Domain<f64>>,
    },
    /// `Σ x_i²/(1+x_i²)` plus additive noise.
    Nonconvex { dimension: usize, noise: NoiseConfig },
    /// One-dimensional two-point lower-bound oracle on `[0, ½]`.
    Lowerbound { epsilon: f64, alpha: f64, nu: u8 },
    /// Probability-`p` zero chain of length `dimension`.
    Chain {
        dimension: usize,
        p: f64,
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default = "one")]
        gradient_scale: f64,
    },
}

impl ProblemConfig {
    pub fn dimension(&self) -> usize {
        match self {
            ProblemConfig::Quadratic { dimension, .. }
            | ProblemConfig::Nonconvex { dimension, .. }
            | ProblemConfig::Chain { dimension, .. } => *dimension,
            ProblemConfig::Lowerbound { .. } => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationTarget {
    /// `G` with `E‖g‖^α ≤ G^α`.
    G,
    /// `σ` with `E‖g − ∇f‖^α ≤ σ^α`.
    Sigma,
    /// Per-coordinate `B_i`.
    CoordinateBounds,
}

/// Empirical estimation of noise constants at the starting point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Moment exponent `α` the constants refer to.
    pub alpha: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Constants to estimate in addition to those the schedule and checks
    /// need.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<CalibrationTarget>,
}

fn default_samples() -> usize {
    1_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsConfig {
    pub count: u64,
    pub master: u64,
}

impl Default for SeedsConfig {
    fn default() -> Self {
        SeedsConfig { count: 1, master: 0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonLines => "jsonl",
        }
    }
}

/// Output file names, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default)]
    pub plots: bool,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig {
            csv: None,
            report: None,
            plots: false,
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    #[default]
    Mean,
    Median,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `16G²/(μ(k+1)^{2(α−1)/α})`.
    Theorem2,
    /// `16‖B‖₂²/(μ(k+1)^{2(α−1)/α})`.
    Cclip,
}

fn suboptimality() -> Metric {
    Metric::Suboptimality
}

/// A pass/fail check evaluated on the seed-aggregated traces. `id` names the
/// acceptance criterion the check implements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Log-log slope over `[k_min, k_max]`: `|slope − expected| ≤ tolerance`
    /// and/or `slope < below`.
    Slope {
        id: String,
        #[serde(default = "suboptimality")]
        metric: Metric,
        #[serde(default)]
        aggregate: Aggregate,
        k_min: f64,
        k_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        below: Option<f64>,
    },
    /// Seed-mean metric stays under a rate bound for every recorded `k ≥ k_min`.
    Envelope {
        id: String,
        bound: BoundKind,
        #[serde(default = "suboptimality")]
        metric: Metric,
        k_min: u64,
    },
    /// `value(numerator_k) / value(denominator_k)` compared with the given
    /// limits (`above` strict, `at_least`/`at_most` inclusive).
    Ratio {
        id: String,
        metric: Metric,
        #[serde(default)]
        aggregate: Aggregate,
        numerator_k: u64,
        denominator_k: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        above: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at_least: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at_most: Option<f64>,
    },
}

impl CheckSpec {
    pub fn id(&self) -> &str {
        match self {
            CheckSpec::Slope { id, .. } | CheckSpec::Envelope { id, .. } | CheckSpec::Ratio { id, .. } => id,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CheckSpec::Slope { .. } => "slope",
            CheckSpec::Envelope { .. } => "envelope",
            CheckSpec::Ratio { .. } => "ratio",
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return config("experiment name is empty");
        }
        if self.seeds.count == 0 {
            return config("seeds.count must be at least 1");
        }
        self.optimizer.validate()?;
        let d = self.problem.dimension();
        if d == 0 {
            return config("problem dimension must be positive");
        }
        if let Some(x0) = &self.optimizer.x0 {
            if x0.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: x0.len(),
                });
            }
        }
        if let Some(c) = &self.calibration {
            if !(c.alpha > 0.0) || c.samples < 2 {
                return config("calibration needs alpha > 0 and at least 2 samples");
            }
        }
        if self.optimizer.algorithm == Algorithm::ProjGClip {
            let has_domain = matches!(
                self.problem,
                ProblemConfig::Quadratic { domain: Some(_), .. } | ProblemConfig::Lowerbound { .. }
            );
            if !has_domain {
                return config("proj_gclip needs a problem domain");
            }
        }
        for check in &self.checks {
            if let CheckSpec::Slope {
                expected,
                tolerance,
                below,
                ..
            } = check
            {
                if below.is_none() && (expected.is_none() || tolerance.is_none()) {
                    return config(format!(
                        "slope check `{}` needs expected+tolerance or below",
                        check.id()
                    ));
                }
            }
            if matches!(check, CheckSpec::Envelope { .. }) && self.problem_mu().is_none() {
                return config(format!("envelope check `{}` needs a strongly convex problem", check.id()));
            }
        }
        Ok(())
    }

    pub(crate) fn problem_mu(&self) -> Option<f64> {
        match self.problem {
            ProblemConfig::Quadratic { mu, .. } => Some(mu),
            _ => None,
        }
    }

    /// Whether the schedule reads `G` or `B` from the problem.
    pub(crate) fn schedule_needs(&self) -> Vec<CalibrationTarget> {
        let mut out = Vec::new();
        match &self.optimizer.schedule {
            ScheduleSpec::Theorem2 { g: None, .. } => {
                if self.optimizer.algorithm == Algorithm::CClip {
                    out.push(CalibrationTarget::CoordinateBounds);
                } else {
                    out.push(CalibrationTarget::G);
                }
            }
            ScheduleSpec::Theorem1 { sigma: None, .. } => out.push(CalibrationTarget::Sigma),
            _ => {}
        }
        for c in &self.checks {
            match c {
                CheckSpec::Envelope {
                    bound: BoundKind::Theorem2,
                    ..
                } => out.push(CalibrationTarget::G),
                CheckSpec::Envelope {
                    bound: BoundKind::Cclip,
                    ..
                } => out.push(CalibrationTarget::CoordinateBounds),
                _ => {}
            }
        }
        out
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }
}

/// Parses a config from text. `origin` names the source in error messages
/// and anchors relative include paths.
pub fn parse_config(text: &str, origin: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut table = load_table(text, origin, &mut Vec::new())?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let cfg: ExperimentConfig = ExperimentConfig::deserialize(toml::Value::Table(table)).map_err(|e| Error::Parse {
        path: origin.display().to_string(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, path, overrides)
}

fn load_table(text: &str, origin: &Path, stack: &mut Vec<PathBuf>) -> Result<toml::Table> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        path: origin.display().to_string(),
        message: e.to_string(),
    })?;
    let includes = match table.remove("include") {
        None => Vec::new(),
        Some(toml::Value::String(s)) => vec![s],
        Some(toml::Value::Array(a)) => a
            .into_iter()
            .map(|v| match v {
                toml::Value::String(s) => Ok(s),
                other => config(format!("include entries must be strings, got {other}")),
            })
            .collect::<Result<_>>()?,
        Some(other) => return config(format!("`include` must be a string or list, got {other}")),
    };
    let base_dir = origin.parent().unwrap_or(Path::new("."));
    let mut merged = toml::Table::new();
    for inc in includes {
        let path = base_dir.join(&inc);
        let canonical = path.canonicalize().unwrap_or_else(|_| path.clone());
        if stack.contains(&canonical) {
            return config(format!("include cycle through {}", path.display()));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        stack.push(canonical);
        let inner = load_table(&text, &path, stack)?;
        stack.pop();
        merge(&mut merged, inner);
    }
    merge(&mut merged, table);
    Ok(merged)
}

/// Deep merge: tables merge recursively, everything else is replaced.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies `dotted.key=value`, where `value` is TOML (bare words are taken
/// as strings).
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override path `{key}` crosses a non-table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "smoke"

[problem]
kind = "quadratic"
mu = 1.0
dimension = 2
x_star = 1.0
noise = { family = "gaussian", scale = 0.5 }

[optimizer]
iterations = 100
algorithm = { name = "gclip" }
schedule = { kind = "constant", eta = 0.1, tau = 1.0 }

[seeds]
count = 2
master = 7
"#;

    #[test]
    fn parses_minimal() {
        let cfg = parse_config(MINIMAL, Path::new("inline.toml"), &[]).unwrap();
        assert_eq!(cfg.seeds.count, 2);
        assert_eq!(cfg.optimizer.algorithm, Algorithm::GClip);
        assert_eq!(cfg.problem.dimension(), 2);
    }

    #[test]
    fn overrides_apply() {
        let cfg = parse_config(
            MINIMAL,
            Path::new("inline.toml"),
            &["seeds.count=5".into(), "optimizer.iterations = 10".into(), "name=other".into()],
        )
        .unwrap();
        assert_eq!(cfg.seeds.count, 5);
        assert_eq!(cfg.optimizer.iterations, 10);
        assert_eq!(cfg.name, "other");
    }

    #[test]
    fn round_trips() {
        let cfg = parse_config(MINIMAL, Path::new("inline.toml"), &[]).unwrap();
        let text = cfg.to_toml_string().unwrap();
        let again = parse_config(&text, Path::new("again.toml"), &[]).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = parse_config("name = \n", Path::new("bad.toml"), &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.toml") && msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = MINIMAL.replace("[seeds]", "[seeds]\nbogus = 1");
        assert!(parse_config(&text, Path::new("x.toml"), &[]).is_err());
    }

    #[test]
    fn fill_or_vec() {
        assert_eq!(FillOrVec::Fill(2.0).expand(2).unwrap(), vec![2.0, 2.0]);
        assert!(FillOrVec::Vec(vec![1.0]).expand(2).is_err());
    }
}
