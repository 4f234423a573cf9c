use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepRule<T> {
    Constant(T),
    /// `η_k = c/(k+1)`.
    InverseTime(T),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThresholdRule<T> {
    /// No clipping.
    Infinite,
    Constant(T),
    /// `τ_k = base·k^exponent`.
    Power { base: T, exponent: T },
    /// `τ_{k,i} = base_i·k^exponent`.
    CoordinatePower { base: Vec<T>, exponent: T },
}

/// Maps the 1-based step index `k` to a step size and threshold(s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule<T> {
    pub step: StepRule<T>,
    pub threshold: ThresholdRule<T>,
    pub label: String,
}

impl<T: Scalar> Schedule<T> {
    pub fn new(step: StepRule<T>, threshold: ThresholdRule<T>, label: impl Into<String>) -> Self {
        Schedule {
            step,
            threshold,
            label: label.into(),
        }
    }

    pub fn constant(eta: T, tau: T) -> Self {
        let threshold = if tau.is_infinite() {
            ThresholdRule::Infinite
        } else {
            ThresholdRule::Constant(tau)
        };
        Self::new(StepRule::Constant(eta), threshold, format!("constant(eta={eta},tau={tau})"))
    }

    #[inline]
    pub fn eta(&self, k: u64) -> T {
        match &self.step {
            StepRule::Constant(eta) => *eta,
            StepRule::InverseTime(c) => *c / T::of(k as f64 + 1.0),
        }
    }

    /// Scalar threshold at step `k`. A coordinate rule reports its largest
    /// entry.
    #[inline]
    pub fn tau(&self, k: u64) -> T {
        match &self.threshold {
            ThresholdRule::Infinite => T::infinity(),
            ThresholdRule::Constant(t) => *t,
            ThresholdRule::Power { base, exponent } => *base * T::of(k as f64).powf(*exponent),
            ThresholdRule::CoordinatePower { base, exponent } => {
                let s = T::of(k as f64).powf(*exponent);
                base.iter().fold(T::zero(), |m, &b| m.max(b * s))
            }
        }
    }

    /// Per-coordinate thresholds at step `k`; scalar rules broadcast.
    #[inline]
    pub fn tau_into(&self, k: u64, out: &mut [T]) {
        match &self.threshold {
            ThresholdRule::CoordinatePower { base, exponent } => {
                let s = T::of(k as f64).powf(*exponent);
                for (o, &b) in out.iter_mut().zip(base) {
                    *o = b * s;
                }
            }
            _ => {
                let t = self.tau(k);
                out.iter_mut().for_each(|o| *o = t);
            }
        }
    }
}

/// Strongly convex schedule: `η_k = 4/(μ(k+1))`, `τ_k = G·k^{1/α}`.
pub fn theorem2_schedule<T: Scalar>(mu: T, g: T, alpha: T) -> Result<Schedule<T>> {
    theorem2_schedule_with_exponent(mu, g, alpha, T::one() / alpha)
}

/// As [`theorem2_schedule`] with an explicit threshold exponent.
pub fn theorem2_schedule_with_exponent<T: Scalar>(mu: T, g: T, alpha: T, exponent: T) -> Result<Schedule<T>> {
    if !(mu > T::zero()) || !(g > T::zero()) {
        return config("theorem2 schedule needs mu > 0 and G > 0");
    }
    if !(alpha > T::one() && alpha <= T::of(2.0)) {
        return config("theorem2 schedule needs alpha in (1, 2]");
    }
    Ok(Schedule::new(
        StepRule::InverseTime(T::of(4.0) / mu),
        ThresholdRule::Power { base: g, exponent },
        format!("theorem2(mu={mu},G={g},alpha={alpha},exp={exponent})"),
    ))
}

/// Coordinate thresholds `τ_i = B_i·k^{1/α}`.
pub fn cclip_thresholds<T: Scalar>(b: &[T], alpha: T, k: u64) -> Vec<T> {
    let s = T::of(k as f64).powf(T::one() / alpha);
    b.iter().map(|&bi| bi * s).collect()
}

/// Nonconvex constant schedule.
///
/// `τ = max{2, 48^{1/(α−1)} σ^{α/(α−1)}, 8σ, (f₀/(σ²K))^{α/(3α−2)} / L^{(2α−2)/(3α−2)}}`
/// and `η = min{1/(4L), σ^α/(Lτ^α), 1/(24Lτ)}`. With `proof_threshold` the
/// last entry of the max is `σ·K^{1/(3α−2)}` instead. `σ = 0` degenerates to
/// `η = 1/(4L)`, `τ = 2`.
pub fn theorem1_schedule<T: Scalar>(
    l: T,
    sigma: T,
    alpha: T,
    iterations: u64,
    f0: T,
    proof_threshold: bool,
) -> Result<Schedule<T>> {
    if !(l > T::zero()) || !(f0 >= T::zero()) || iterations == 0 || !(sigma >= T::zero()) {
        return config("theorem1 schedule needs L > 0, sigma >= 0, f0 >= 0, K >= 1");
    }
    if !(alpha > T::one() && alpha <= T::of(2.0)) {
        return config("theorem1 schedule needs alpha in (1, 2]");
    }
    let two = T::of(2.0);
    if sigma == T::zero() {
        let eta = T::one() / (T::of(4.0) * l);
        return Ok(Schedule::new(
            StepRule::Constant(eta),
            ThresholdRule::Constant(two),
            format!("theorem1(L={l},sigma=0)"),
        ));
    }
    let k = T::of(iterations as f64);
    let am1 = alpha - T::one();
    let denom = T::of(3.0) * alpha - two;
    let last = if proof_threshold {
        sigma * k.powf(T::one() / denom)
    } else {
        (f0 / (sigma * sigma * k)).powf(alpha / denom) / l.powf((two * alpha - two) / denom)
    };
    let tau = two
        .max(T::of(48.0).powf(T::one() / am1) * sigma.powf(alpha / am1))
        .max(T::of(8.0) * sigma)
        .max(last);
    let eta = (T::one() / (T::of(4.0) * l))
        .min(sigma.powf(alpha) / (l * tau.powf(alpha)))
        .min(T::one() / (T::of(24.0) * l * tau));
    Ok(Schedule::new(
        StepRule::Constant(eta),
        ThresholdRule::Constant(tau),
        format!(
            "theorem1(L={l},sigma={sigma},alpha={alpha},K={iterations},f0={f0}{})",
            if proof_threshold { ",proof" } else { "" }
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem2_values() {
        let s = theorem2_schedule(1.0f64, 1.0, 2.0).unwrap();
        assert_eq!(s.eta(3), 1.0);
        assert_eq!(s.tau(16), 4.0);
        assert!(theorem2_schedule(0.0f64, 1.0, 1.5).is_err());
        assert!(theorem2_schedule(1.0f64, 1.0, 1.0).is_err());
    }

    #[test]
    fn theorem1_hand_arithmetic() {
        let s = theorem1_schedule(1.0f64, 1.0, 2.0, 1, 1.0, false).unwrap();
        assert_eq!(s.tau(1), 48.0);
        assert!((s.eta(1) - 1.0 / 2304.0).abs() < 1e-18);
    }

    #[test]
    fn theorem1_degenerate_and_errors() {
        let s = theorem1_schedule(2.0f64, 0.0, 1.5, 100, 1.0, false).unwrap();
        assert_eq!(s.eta(5), 0.125);
        assert_eq!(s.tau(5), 2.0);
        assert!(theorem1_schedule(1.0f64, 1.0, 1.0, 10, 1.0, false).is_err());
        assert!(theorem1_schedule(0.0f64, 1.0, 1.5, 10, 1.0, false).is_err());
    }

    #[test]
    fn cclip_threshold_values() {
        assert_eq!(cclip_thresholds(&[1.0f64, 2.0], 2.0, 4), vec![2.0, 4.0]);
        assert_eq!(cclip_thresholds(&[1.0f64, 2.0], 1.5, 1), vec![1.0, 2.0]);
        assert_eq!(cclip_thresholds(&[0.0f64, 0.0], 1.5, 9), vec![0.0, 0.0]);
    }

    #[test]
    fn coordinate_rule_broadcast() {
        let s = Schedule::new(
            StepRule::Constant(0.1f64),
            ThresholdRule::CoordinatePower { base: vec![1.0, 3.0], exponent: 0.5 },
            "c",
        );
        let mut out = [0.0; 2];
        s.tau_into(4, &mut out);
        assert_eq!(out, [2.0, 6.0]);
        assert_eq!(s.tau(4), 6.0);
        let g = Schedule::constant(0.1f64, 5.0);
        g.tau_into(7, &mut out);
        assert_eq!(out, [5.0, 5.0]);
        assert_eq!(Schedule::constant(0.1f64, f64::INFINITY).threshold, ThresholdRule::Infinite);
    }
}
