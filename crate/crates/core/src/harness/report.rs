use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Outcome of one declared check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Acceptance criterion the check implements.
    pub criterion: String,
    pub experiment: String,
    pub check: String,
    pub passed: bool,
    pub observed: f64,
    /// Human-readable pass condition.
    pub condition: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Verdict {
    pub fn new(criterion: &str, experiment: &str, check: &str, passed: bool, observed: f64, condition: impl Into<String>) -> Self {
        Verdict {
            criterion: criterion.to_string(),
            experiment: experiment.to_string(),
            check: check.to_string(),
            passed,
            observed,
            condition: condition.into(),
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "[{}] {} {}/{}: observed {:.6} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.experiment,
            self.check,
            self.observed,
            self.condition
        );
        if !self.detail.is_empty() {
            let _ = write!(s, "; {}", self.detail);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub version: String,
    pub master_seed: u64,
    pub wall_time_s: f64,
    /// Free-form `key: value` facts (constants, fits, fuzz extremes).
    pub facts: Vec<(String, String)>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(title: impl Into<String>, master_seed: u64) -> Self {
        Report {
            title: title.into(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            wall_time_s: 0.0,
            facts: Vec::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn fact(&mut self, key: impl Into<String>, value: impl ToString) {
        self.facts.push((key.into(), value.to_string()));
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.title);
        let _ = writeln!(
            s,
            "version {}  master seed {}  wall time {:.2}s",
            self.version, self.master_seed, self.wall_time_s
        );
        if !self.facts.is_empty() {
            s.push('\n');
            for (k, v) in &self.facts {
                let _ = writeln!(s, "{k}: {v}");
            }
        }
        if !self.verdicts.is_empty() {
            s.push('\n');
            for v in &self.verdicts {
                let _ = writeln!(s, "{}", v.line());
            }
            let passed = self.verdicts.iter().filter(|v| v.passed).count();
            let _ = writeln!(s, "\n{passed}/{} checks passed", self.verdicts.len());
        }
        s
    }

    /// One JSON object per verdict.
    pub fn render_verdicts(&self) -> String {
        self.verdicts
            .iter()
            .map(|v| serde_json::to_string(v).expect("verdict serializes") + "\n")
            .collect()
    }

    /// Writes `<stem>.txt` and `<stem>.verdicts.jsonl` next to each other.
    pub fn write(&self, stem: &Path) -> Result<()> {
        if let Some(dir) = stem.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(stem.with_extension("txt"), self.render_text())?;
        std::fs::write(stem.with_extension("verdicts.jsonl"), self.render_verdicts())?;
        Ok(())
    }
}
