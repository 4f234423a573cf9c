use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NoiseSpec;
use crate::error::{config, Error, Result};
use crate::scalar::{norm, Scalar};

/// Empirical `E‖X‖^p` with its (descriptive) standard error.
///
/// For heavy-tailed inputs the standard error may estimate an infinite
/// quantity; it is reported, not trusted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub exponent: f64,
    pub value: f64,
    pub sample_count: usize,
    pub standard_error: f64,
}

impl MomentEstimate {
    /// `value^(1/exponent)`, e.g. σ from an estimate of σ^α.
    pub fn root(&self) -> f64 {
        self.value.powf(1.0 / self.exponent)
    }

    /// Upper confidence-style value `value + z·se`.
    pub fn upper(&self, z: f64) -> f64 {
        self.value + z * self.standard_error
    }
}

/// Streaming mean/variance of `‖x‖^p` (Welford).
#[derive(Clone, Debug)]
pub struct MomentAccumulator {
    exponent: f64,
    n: usize,
    mean: f64,
    m2: f64,
}

impl MomentAccumulator {
    pub fn new(exponent: f64) -> Self {
        MomentAccumulator {
            exponent,
            n: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    /// Push a magnitude `r = ‖x‖`; accumulates `r^p`.
    #[inline]
    pub fn push_norm(&mut self, r: f64) {
        let v = if self.exponent == 2.0 {
            r * r
        } else if self.exponent == 1.0 {
            r
        } else {
            r.powf(self.exponent)
        };
        self.push_value(v);
    }

    #[inline]
    pub fn push_value(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn finish(&self) -> Result<MomentEstimate> {
        if self.n < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.n,
            });
        }
        let var = self.m2 / (self.n - 1) as f64;
        Ok(MomentEstimate {
            exponent: self.exponent,
            value: self.mean,
            sample_count: self.n,
            standard_error: (var / self.n as f64).sqrt(),
        })
    }
}

/// `(1/n) Σ ‖x_i‖^p` over vector samples.
pub fn empirical_moment<T: Scalar, S: AsRef<[T]>>(samples: &[S], p: f64) -> Result<MomentEstimate> {
    if !(p > 0.0) {
        return config(format!("moment exponent must be positive, got {p}"));
    }
    let mut acc = MomentAccumulator::new(p);
    for s in samples {
        acc.push_norm(norm(s.as_ref()).as_f64());
    }
    acc.finish()
}

/// Running empirical second moment `(1/n)Σ‖x_i‖²` recorded at each checkpoint
/// in a single streaming pass.
pub fn variance_growth_curve<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<Vec<(usize, f64)>> {
    spec.validate()?;
    if checkpoints.is_empty() || checkpoints[0] == 0 {
        return config("checkpoints must be positive");
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return config("checkpoints must be strictly increasing");
    }
    let mut buf = vec![0.0f64; spec.dimension];
    let mut sum = 0.0f64;
    let mut n = 0usize;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        while n < c {
            spec.sample_into(rng, &mut buf);
            sum += buf.iter().map(|v| v * v).sum::<f64>();
            n += 1;
        }
        out.push((c, sum / n as f64));
    }
    Ok(out)
}
