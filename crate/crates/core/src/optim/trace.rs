use serde::{Deserialize, Serialize};

use crate::rng::Seed;

/// One recorded step. All values are stored as `f64` whatever the run's
/// scalar type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: u64,
    /// `f(x) − f*` at the configured evaluation point, when `f*` is known.
    pub suboptimality: Option<f64>,
    /// Exact `‖∇f(x_k)‖`.
    pub grad_norm: f64,
    /// Running mean of `min{‖∇f(x_j)‖, ‖∇f(x_j)‖²}` over `j = 1..=k`.
    pub min_grad_stat: f64,
    /// Running mean of `‖∇f(x_j)‖²` over `j = 1..=k`.
    pub grad_sq_mean: f64,
    /// Fraction of coordinates clipped at step `k` (0 or 1 for global clipping).
    pub clip_frac: f64,
    /// Step size times the mean clip (or adaptive) factor at step `k`.
    pub eff_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub seed: Seed,
    pub algorithm: String,
    pub schedule: String,
    pub problem: String,
    pub records: Vec<TraceRecord>,
    pub final_x: Vec<f64>,
    /// Weighted average `x̄_K` of `x_0..x_{K−1}`.
    pub final_average: Vec<f64>,
}

impl Trace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Record at exactly step `k`.
    pub fn at(&self, k: u64) -> Option<&TraceRecord> {
        self.records
            .binary_search_by_key(&k, |r| r.k)
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn ks(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.k).collect()
    }
}
