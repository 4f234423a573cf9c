//! CSV and JSON-lines writers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a file back yields bit-identical values.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::OutputFormat;
use crate::error::{Error, Result};
use crate::optim::{Trace, TraceRecord};

/// The trace CSV columns, in order.
pub const TRACE_COLUMNS: [&str; 9] = [
    "experiment",
    "algorithm",
    "seed",
    "k",
    "suboptimality",
    "grad_norm",
    "min_grad_stat",
    "clip_frac",
    "eff_step",
];

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| serde_json::Value::String(format!("{v:?}"))),
            Cell::Int(v) => serde_json::Value::from(*v),
            Cell::Text(s) => serde_json::Value::String(s.clone()),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// A named rectangular table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> Result<Vec<u8>> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns).map_err(csv_err)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(csv_err)?;
                }
                w.into_inner().map_err(|e| Error::Io(e.into_error()))
            }
            OutputFormat::JsonLines => {
                let mut out = Vec::new();
                for row in &self.rows {
                    // Written by hand to keep column order.
                    out.push(b'{');
                    for (i, (c, v)) in self.columns.iter().zip(row).enumerate() {
                        if i > 0 {
                            out.push(b',');
                        }
                        serde_json::to_writer(&mut out, c).map_err(json_err)?;
                        out.push(b':');
                        serde_json::to_writer(&mut out, &v.json()).map_err(json_err)?;
                    }
                    out.push(b'}');
                    out.push(b'\n');
                }
                Ok(out)
            }
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.render(format)?)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// One row of the trace CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub experiment: String,
    pub algorithm: String,
    pub seed: u64,
    pub k: u64,
    pub suboptimality: Option<f64>,
    pub grad_norm: f64,
    pub min_grad_stat: f64,
    pub clip_frac: f64,
    pub eff_step: f64,
}

/// Flattens traces into the trace table. `seed` is each run's stream index.
pub fn trace_table(experiment: &str, traces: &[Trace]) -> Table {
    let mut t = Table::new(experiment, &TRACE_COLUMNS);
    for tr in traces {
        for r in &tr.records {
            t.push(vec![
                experiment.into(),
                tr.algorithm.as_str().into(),
                tr.seed.stream.into(),
                r.k.into(),
                r.suboptimality.into(),
                r.grad_norm.into(),
                r.min_grad_stat.into(),
                r.clip_frac.into(),
                r.eff_step.into(),
            ]);
        }
    }
    t
}

/// Reads a trace file in either format (JSON lines when the first
/// non-blank character is `{`).
pub fn read_trace_rows(path: &Path) -> Result<Vec<TraceRow>> {
    let text = std::fs::read_to_string(path)?;
    let parse_err = |message: String| Error::Parse {
        path: path.display().to_string(),
        message,
    };
    if text.trim_start().starts_with('{') {
        return text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let v: serde_json::Value =
                    serde_json::from_str(l).map_err(|e| parse_err(format!("line {}: {e}", i + 1)))?;
                row_from_json(&v).map_err(|e| parse_err(format!("line {}: {e}", i + 1)))
            })
            .collect();
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header != TRACE_COLUMNS {
        return Err(parse_err(format!("unexpected header {header:?}")));
    }
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(format!("line {line}: {e}"))
            })
        })
        .collect()
}

fn row_from_json(v: &serde_json::Value) -> std::result::Result<TraceRow, String> {
    let num = |key: &str| -> std::result::Result<Option<f64>, String> {
        match v.get(key) {
            None | Some(serde_json::Value::Null) => Ok(None),
            Some(serde_json::Value::Number(n)) => Ok(n.as_f64()),
            Some(serde_json::Value::String(s)) => s.parse().map(Some).map_err(|_| format!("bad number in `{key}`")),
            Some(_) => Err(format!("`{key}` is not a number")),
        }
    };
    let req = |key: &str| num(key)?.ok_or_else(|| format!("missing `{key}`"));
    let text = |key: &str| {
        v.get(key)
            .and_then(|s| s.as_str())
            .map(String::from)
            .ok_or_else(|| format!("missing `{key}`"))
    };
    Ok(TraceRow {
        experiment: text("experiment")?,
        algorithm: text("algorithm")?,
        seed: req("seed")? as u64,
        k: req("k")? as u64,
        suboptimality: num("suboptimality")?,
        grad_norm: req("grad_norm")?,
        min_grad_stat: req("min_grad_stat")?,
        clip_frac: req("clip_frac")?,
        eff_step: req("eff_step")?,
    })
}

/// Regroups rows into per-(experiment, algorithm, seed) traces, in first
/// appearance order. Fields the file does not carry are `NaN`/empty.
pub fn traces_from_rows(rows: &[TraceRow]) -> Vec<(String, Trace)> {
    let mut out: Vec<(String, Trace)> = Vec::new();
    for r in rows {
        let idx = out.iter().position(|(e, t)| *e == r.experiment && t.algorithm == r.algorithm && t.seed.stream == r.seed);
        let idx = match idx {
            Some(i) => i,
            None => {
                out.push((
                    r.experiment.clone(),
                    Trace {
                        seed: crate::rng::Seed { master: 0, stream: r.seed },
                        algorithm: r.algorithm.clone(),
                        schedule: String::new(),
                        problem: String::new(),
                        records: Vec::new(),
                        final_x: Vec::new(),
                        final_average: Vec::new(),
                    },
                ));
                out.len() - 1
            }
        };
        out[idx].1.records.push(TraceRecord {
            k: r.k,
            suboptimality: r.suboptimality,
            grad_norm: r.grad_norm,
            min_grad_stat: r.min_grad_stat,
            grad_sq_mean: f64::NAN,
            clip_frac: r.clip_frac,
            eff_step: r.eff_step,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_round_trips_floats() {
        let mut t = Table::new("x", &["name", "v", "n", "e"]);
        t.push(vec!["a,b".into(), 0.1f64.into(), 3u64.into(), Cell::Empty]);
        t.push(vec!["c".into(), (1.0f64 / 3.0).into(), 4u64.into(), 1e-300f64.into()]);
        let s = String::from_utf8(t.render(OutputFormat::Csv).unwrap()).unwrap();
        assert_eq!(
            s,
            "name,v,n,e\n\"a,b\",0.1,3,\n\
             c,0.3333333333333333,4,1e-300\n"
        );
        let j = String::from_utf8(t.render(OutputFormat::JsonLines).unwrap()).unwrap();
        assert!(j.starts_with("{\"name\":\"a,b\",\"v\":0.1,\"n\":3,\"e\":null}\n"), "{j}");
    }
}
