use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// RMSProp hyper-parameters: base step `a`, second-moment decay `β₂`, `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmsPropParams {
    pub a: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for RmsPropParams {
    fn default() -> Self {
        RmsPropParams {
            a: 1e-3,
            beta2: 0.99,
            epsilon: 1e-8,
        }
    }
}

impl RmsPropParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !(self.beta2 > 0.0 && self.beta2 < 1.0) || !(self.epsilon > 0.0) {
            return config("sandwich needs a > 0, beta2 in (0, 1), epsilon > 0");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichResult {
    /// RMSProp effective step `a/(ε + √(β₂v + (1−β₂)g²))`.
    pub h_adam: f64,
    /// Clipped-SGD effective step `η·min{τ/|g|, 1}` with
    /// `η = 2a/(ε+√(β₂v))` and `τ = (ε+√(β₂v))/√(1−β₂)`.
    pub h_clip: f64,
    pub ratio: f64,
    /// `¼·h_clip ≤ h_adam ≤ 2·h_clip`.
    pub within: bool,
}

/// Compares the RMSProp step with its clipped-SGD reading at one `(v, g)`.
pub fn sandwich_check(v: f64, g: f64, p: RmsPropParams) -> SandwichResult {
    let base = p.epsilon + (p.beta2 * v).sqrt();
    let h_adam = p.a / (p.epsilon + (p.beta2 * v + (1.0 - p.beta2) * g * g).sqrt());
    let eta = 2.0 * p.a / base;
    let tau = base / (1.0 - p.beta2).sqrt();
    let factor = if g == 0.0 { 1.0 } else { (tau / g.abs()).min(1.0) };
    let h_clip = eta * factor;
    let ratio = h_adam / h_clip;
    SandwichResult {
        h_adam,
        h_clip,
        ratio,
        within: 0.25 * h_clip <= h_adam && h_adam <= 2.0 * h_clip,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichFuzz {
    pub points: u64,
    pub violations: u64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `(v, g)` attaining the smallest ratio.
    pub argmin: (f64, f64),
}

/// Checks the band at `n` uniform points of `[0, v_max] × [−g_max, g_max]`.
pub fn sandwich_fuzz<R: Rng + ?Sized>(
    n: u64,
    v_max: f64,
    g_max: f64,
    p: RmsPropParams,
    rng: &mut R,
) -> Result<SandwichFuzz> {
    p.validate()?;
    let mut out = SandwichFuzz {
        points: n,
        violations: 0,
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        argmin: (f64::NAN, f64::NAN),
    };
    for _ in 0..n {
        let v = rng.random::<f64>() * v_max;
        let g = (2.0 * rng.random::<f64>() - 1.0) * g_max;
        let r = sandwich_check(v, g, p);
        if !r.within {
            out.violations += 1;
        }
        if r.ratio < out.min_ratio {
            out.min_ratio = r.ratio;
            out.argmin = (v, g);
        }
        out.max_ratio = out.max_ratio.max(r.ratio);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_gradient_gives_half() {
        for v in [0.0, 0.3, 7.0] {
            let r = sandwich_check(v, 0.0, RmsPropParams::default());
            assert_relative_eq!(r.ratio, 0.5, max_relative = 1e-14);
            assert!(r.within);
        }
    }

    #[test]
    fn worked_example() {
        let r = sandwich_check(1.0, 1.0, RmsPropParams::default());
        assert_relative_eq!(r.h_adam, 1.0e-3, max_relative = 1e-6);
        assert_relative_eq!(r.h_clip, 2.010_075_5e-3, max_relative = 1e-6);
        assert_relative_eq!(r.ratio, 0.497_493_7, max_relative = 1e-6);
        assert!(r.within);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = RmsPropParams::default();
        p.beta2 = 1.0;
        assert!(p.validate().is_err());
    }
}
