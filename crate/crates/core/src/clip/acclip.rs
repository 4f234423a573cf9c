use serde::{Deserialize, Serialize};

use crate::error::{check_dim, config, Result};
use crate::scalar::Scalar;

/// Hyperparameters of adaptive coordinate-wise clipping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ACClipParams {
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Steps of pure moment accumulation before the iterate starts moving.
    #[serde(default)]
    pub warmup_steps: u64,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.99
}
fn default_alpha() -> f64 {
    1.0
}
fn default_epsilon() -> f64 {
    1e-5
}

impl Default for ACClipParams {
    fn default() -> Self {
        ACClipParams {
            beta1: default_beta1(),
            beta2: default_beta2(),
            alpha: default_alpha(),
            epsilon: default_epsilon(),
            warmup_steps: 0,
        }
    }
}

impl ACClipParams {
    /// The setting under which ACClip is plain SGD.
    pub fn sgd_reduction() -> Self {
        ACClipParams {
            beta1: 0.0,
            beta2: 0.0,
            alpha: 1.0,
            epsilon: 0.0,
            warmup_steps: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return config("ACClip betas must lie in [0, 1)");
        }
        if !(1.0..=2.0).contains(&self.alpha) {
            return config("ACClip alpha must lie in [1, 2]");
        }
        if !(self.epsilon >= 0.0) {
            return config("ACClip epsilon must be nonnegative");
        }
        Ok(())
    }
}

/// Iterate, momentum and per-coordinate moment estimate `τ^α`.
#[derive(Clone, Debug, PartialEq)]
pub struct ACClipState<T> {
    pub x: Vec<T>,
    pub m: Vec<T>,
    pub tau_alpha: Vec<T>,
    pub k: u64,
    pub params: ACClipParams,
}

impl<T: Scalar> ACClipState<T> {
    /// Fresh state at `x0` with `m = 0` and `τ^α = 0`.
    pub fn new(x0: Vec<T>, params: ACClipParams) -> Result<Self> {
        params.validate()?;
        let d = x0.len();
        Ok(ACClipState {
            x: x0,
            m: vec![T::zero(); d],
            tau_alpha: vec![T::zero(); d],
            k: 0,
            params,
        })
    }

    /// Fresh state with an explicit initial moment estimate.
    pub fn with_tau_alpha(mut self, tau_alpha: Vec<T>) -> Result<Self> {
        check_dim(self.x.len(), tau_alpha.len())?;
        if tau_alpha.iter().any(|t| *t < T::zero()) {
            return config("tau_alpha must be nonnegative");
        }
        self.tau_alpha = tau_alpha;
        Ok(self)
    }

    /// Current thresholds `τ = (τ^α)^(1/α)`.
    pub fn tau(&self) -> Vec<T> {
        let inv = T::of(1.0 / self.params.alpha);
        self.tau_alpha
            .iter()
            .map(|&t| if self.params.alpha == 1.0 { t } else { t.powf(inv) })
            .collect()
    }

    /// In-place step. Returns `(clipped coordinates, mean clip factor)`;
    /// `ghat` receives the clipped momentum.
    pub fn step_in_place(&mut self, g: &[T], eta: T, ghat: &mut [T]) -> (usize, T) {
        let p = self.params;
        let b1 = T::of(p.beta1);
        let b2 = T::of(p.beta2);
        let eps = T::of(p.epsilon);
        let alpha_is_one = p.alpha == 1.0;
        let alpha = T::of(p.alpha);
        let inv_alpha = T::of(1.0 / p.alpha);
        self.k += 1;
        let moving = self.k > p.warmup_steps;
        let mut clipped = 0;
        let mut factor_sum = T::zero();
        for i in 0..g.len() {
            let gi = g[i];
            let m = b1 * self.m[i] + (T::one() - b1) * gi;
            self.m[i] = m;
            let mag = if alpha_is_one { gi.abs() } else { gi.abs().powf(alpha) };
            let ta = b2 * self.tau_alpha[i] + (T::one() - b2) * mag;
            self.tau_alpha[i] = ta;
            let tau = if alpha_is_one { ta } else { ta.powf(inv_alpha) };
            let (h, c) = if m == T::zero() {
                (T::zero(), T::one())
            } else {
                let c = (tau / (m.abs() + eps)).min(T::one());
                if c < T::one() {
                    clipped += 1;
                }
                (c * m, c)
            };
            ghat[i] = h;
            factor_sum = factor_sum + c;
            if moving {
                self.x[i] = self.x[i] - eta * h;
            }
        }
        let mean = if g.is_empty() {
            T::one()
        } else {
            factor_sum / T::of(g.len() as f64)
        };
        (clipped, if moving { mean } else { T::zero() })
    }
}

/// One ACClip transition: momentum, moment estimate, clipped momentum step.
pub fn acclip_step<T: Scalar>(state: &ACClipState<T>, g: &[T], eta: T) -> Result<ACClipState<T>> {
    check_dim(state.x.len(), g.len())?;
    if !(eta > T::zero()) {
        return config("step size must be positive");
    }
    let mut next = state.clone();
    let mut ghat = vec![T::zero(); g.len()];
    next.step_in_place(g, eta, &mut ghat);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_trace_frozen_moment() {
        let params = ACClipParams {
            beta1: 0.0,
            beta2: 0.0,
            alpha: 1.0,
            epsilon: 0.0,
            warmup_steps: 0,
        };
        // β₂ = 1 is outside [0,1) for validation, so set it after construction.
        let mut s = ACClipState::new(vec![0.0f64], params)
            .unwrap()
            .with_tau_alpha(vec![1.0])
            .unwrap();
        s.params.beta2 = 1.0;
        let next = acclip_step(&s, &[2.0], 1.0).unwrap();
        assert_eq!(next.m, vec![2.0]);
        assert_eq!(next.tau(), vec![1.0]);
        assert_eq!(next.x, vec![-1.0]);
        assert_eq!(next.k, 1);
    }

    #[test]
    fn zero_betas_give_sgd() {
        let s = ACClipState::new(vec![0.5f64, -1.0], ACClipParams::sgd_reduction()).unwrap();
        let g = [0.3, -7.0];
        let next = acclip_step(&s, &g, 0.1).unwrap();
        assert_eq!(next.tau(), vec![0.3, 7.0]);
        assert_eq!(next.x, vec![0.5 - 0.1 * 0.3, -1.0 - 0.1 * -7.0]);
    }

    #[test]
    fn zero_gradient_keeps_iterate() {
        let s = ACClipState::new(vec![1.0f64, 2.0], ACClipParams::default()).unwrap();
        let next = acclip_step(&s, &[0.0, 0.0], 0.5).unwrap();
        assert_eq!(next.x, s.x);
    }

    #[test]
    fn errors() {
        let s = ACClipState::new(vec![1.0f64], ACClipParams::default()).unwrap();
        assert!(acclip_step(&s, &[1.0, 2.0], 0.1).is_err());
        assert!(acclip_step(&s, &[1.0], 0.0).is_err());
        assert!(ACClipState::new(vec![0.0f64], ACClipParams { alpha: 0.5, ..Default::default() }).is_err());
    }

    #[test]
    fn warmup_only_accumulates() {
        let params = ACClipParams {
            warmup_steps: 2,
            ..ACClipParams::default()
        };
        let mut s = ACClipState::new(vec![1.0f64], params).unwrap();
        for _ in 0..2 {
            s = acclip_step(&s, &[3.0], 0.1).unwrap();
        }
        assert_eq!(s.x, vec![1.0]);
        assert!(s.tau_alpha[0] > 0.0);
        s = acclip_step(&s, &[3.0], 0.1).unwrap();
        assert!(s.x[0] < 1.0);
    }
}
