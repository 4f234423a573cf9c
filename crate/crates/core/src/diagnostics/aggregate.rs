use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::optim::{Trace, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Suboptimality,
    GradNorm,
    /// Running mean of `min{‖∇f‖, ‖∇f‖²}`.
    #[serde(alias = "min_gradnorm_sq")]
    MinGradStat,
    /// Running mean of `‖∇f‖²`.
    GradSqMean,
    ClipFrac,
    EffStep,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Suboptimality => "suboptimality",
            Metric::GradNorm => "grad_norm",
            Metric::MinGradStat => "min_grad_stat",
            Metric::GradSqMean => "grad_sq_mean",
            Metric::ClipFrac => "clip_frac",
            Metric::EffStep => "eff_step",
        }
    }

    pub fn of(self, r: &TraceRecord) -> Option<f64> {
        match self {
            Metric::Suboptimality => r.suboptimality,
            Metric::GradNorm => Some(r.grad_norm),
            Metric::MinGradStat => Some(r.min_grad_stat),
            Metric::GradSqMean => Some(r.grad_sq_mean),
            Metric::ClipFrac => Some(r.clip_frac),
            Metric::EffStep => Some(r.eff_step),
        }
    }
}

/// A metric aggregated across seeds at each recorded step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedCurve {
    pub metric: Metric,
    pub seeds: usize,
    pub points: Vec<(u64, f64)>,
}

impl SeedCurve {
    pub fn at(&self, k: u64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == k).map(|p| p.1)
    }

    /// `(k, value)` pairs as floats, ready for a log-log fit.
    pub fn as_f64(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|&(k, v)| (k as f64, v)).collect()
    }
}

fn collect(traces: &[Trace], metric: Metric) -> Result<Vec<(u64, Vec<f64>)>> {
    let first = traces
        .first()
        .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let mut columns: Vec<(u64, Vec<f64>)> = first
        .records
        .iter()
        .map(|r| (r.k, Vec::with_capacity(traces.len())))
        .collect();
    for t in traces {
        if t.records.len() != columns.len() {
            return config("traces were recorded at different steps");
        }
        for (col, r) in columns.iter_mut().zip(&t.records) {
            if col.0 != r.k {
                return config("traces were recorded at different steps");
            }
            let v = metric
                .of(r)
                .ok_or_else(|| Error::Config(format!("metric `{}` was not recorded", metric.name())))?;
            col.1.push(v);
        }
    }
    Ok(columns)
}

/// Mean over seeds at each recorded `k`, taken in metric space.
pub fn seed_mean(traces: &[Trace], metric: Metric) -> Result<SeedCurve> {
    let points = collect(traces, metric)?
        .into_iter()
        .map(|(k, vs)| (k, vs.iter().sum::<f64>() / vs.len() as f64))
        .collect();
    Ok(SeedCurve {
        metric,
        seeds: traces.len(),
        points,
    })
}

pub fn seed_median(traces: &[Trace], metric: Metric) -> Result<SeedCurve> {
    let points = collect(traces, metric)?
        .into_iter()
        .map(|(k, vs)| (k, super::stats::median(&vs)))
        .collect();
    Ok(SeedCurve {
        metric,
        seeds: traces.len(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    fn trace(values: &[(u64, f64)]) -> Trace {
        Trace {
            seed: Seed::new(0),
            algorithm: "sgd".into(),
            schedule: String::new(),
            problem: String::new(),
            records: values
                .iter()
                .map(|&(k, v)| TraceRecord {
                    k,
                    suboptimality: Some(v),
                    grad_norm: v,
                    min_grad_stat: v,
                    grad_sq_mean: v,
                    clip_frac: 0.0,
                    eff_step: 0.0,
                })
                .collect(),
            final_x: vec![],
            final_average: vec![],
        }
    }

    #[test]
    fn mean_is_taken_before_logs() {
        let ts = [trace(&[(1, 1.0), (2, 100.0)]), trace(&[(1, 3.0), (2, 0.0)])];
        let c = seed_mean(&ts, Metric::Suboptimality).unwrap();
        assert_eq!(c.points, vec![(1, 2.0), (2, 50.0)]);
        let m = seed_median(&ts, Metric::GradNorm).unwrap();
        assert_eq!(m.at(2), Some(50.0));
    }

    #[test]
    fn mismatched_steps_are_rejected() {
        let ts = [trace(&[(1, 1.0)]), trace(&[(2, 1.0)])];
        assert!(seed_mean(&ts, Metric::GradNorm).is_err());
        assert!(seed_mean(&[], Metric::GradNorm).is_err());
    }
}
