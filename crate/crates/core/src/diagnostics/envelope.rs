use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// `bound(k) = constant / (μ·(k+1)^exponent)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub constant: f64,
    pub mu: f64,
    pub exponent: f64,
}

impl RateBound {
    /// `16G²/(μ(k+1)^{2(α−1)/α})`.
    pub fn theorem2(g: f64, mu: f64, alpha: f64) -> Result<Self> {
        Self::checked(16.0 * g * g, mu, alpha)
    }

    /// `16‖B‖₂²/(μ(k+1)^{2(α−1)/α})` for coordinate-wise clipping.
    pub fn cclip(b: &[f64], mu: f64, alpha: f64) -> Result<Self> {
        if b.is_empty() {
            return config("coordinate bounds are empty");
        }
        Self::checked(16.0 * b.iter().map(|x| x * x).sum::<f64>(), mu, alpha)
    }

    fn checked(constant: f64, mu: f64, alpha: f64) -> Result<Self> {
        if !(constant > 0.0 && constant.is_finite()) || !(mu > 0.0) || !(alpha > 1.0 && alpha <= 2.0) {
            return config("rate bound needs positive constants and alpha in (1, 2]");
        }
        Ok(RateBound {
            constant,
            mu,
            exponent: 2.0 * (alpha - 1.0) / alpha,
        })
    }

    pub fn eval(&self, k: f64) -> f64 {
        self.constant / (self.mu * (k + 1.0).powf(self.exponent))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub violations: Vec<u64>,
    /// Largest `metric/bound − 1` over the checked steps (negative when the
    /// curve stays strictly inside).
    pub max_excess: f64,
    pub checked: usize,
}

impl EnvelopeResult {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Reports every `k ≥ k_min` where the metric exceeds `bound(k)`. Touching
/// the bound is not a violation; a `NaN` metric is.
pub fn bound_envelope_check(points: &[(u64, f64)], bound: impl Fn(f64) -> f64, k_min: u64) -> EnvelopeResult {
    let mut out = EnvelopeResult {
        violations: Vec::new(),
        max_excess: f64::NEG_INFINITY,
        checked: 0,
    };
    for &(k, v) in points.iter().filter(|p| p.0 >= k_min) {
        let b = bound(k as f64);
        out.checked += 1;
        let excess = v / b - 1.0;
        if v.is_nan() || v > b {
            out.violations.push(k);
        }
        if excess.is_nan() {
            out.max_excess = f64::NAN;
        } else if !out.max_excess.is_nan() {
            out.max_excess = out.max_excess.max(excess);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_metric_passes() {
        let pts: Vec<_> = (1..50).map(|k| (k, 0.0)).collect();
        let r = bound_envelope_check(&pts, |k| 1.0 / k, 1);
        assert!(r.passed());
        assert_eq!(r.checked, 49);
    }

    #[test]
    fn single_excess() {
        let bound = RateBound::theorem2(1.0, 1.0, 1.5).unwrap();
        let mut pts: Vec<_> = (10..20).map(|k| (k, bound.eval(k as f64))).collect();
        pts[3].1 *= 1.01;
        let r = bound_envelope_check(&pts, |k| bound.eval(k), 10);
        assert_eq!(r.violations, vec![13]);
        assert_relative_eq!(r.max_excess, 0.01, max_relative = 1e-9);
    }

    #[test]
    fn boundary_is_a_pass() {
        let pts: Vec<_> = (1..30).map(|k| (k, 2.0 / k as f64)).collect();
        assert!(bound_envelope_check(&pts, |k| 2.0 / k, 1).passed());
    }

    #[test]
    fn k_min_and_constants() {
        let pts = vec![(1, 100.0), (10, 0.0)];
        assert!(bound_envelope_check(&pts, |_| 1.0, 10).passed());
        assert!(RateBound::theorem2(1.0, 0.0, 1.5).is_err());
        assert!(RateBound::theorem2(1.0, 1.0, 1.0).is_err());
        let b = RateBound::cclip(&[1.0, 2.0], 1.0, 2.0).unwrap();
        assert_relative_eq!(b.eval(3.0), 80.0 / 4.0);
    }
}
