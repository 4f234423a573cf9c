use serde::{Deserialize, Serialize};

use super::schedule::{theorem1_schedule, theorem2_schedule_with_exponent, Schedule, StepRule, ThresholdRule};
use crate::clip::ACClipParams;
use crate::error::{config, Error, Result};
use crate::problems::StochasticProblem;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Algorithm {
    Sgd,
    /// `m ← β₁m + (1−β₁)g`, `x ← x − ηm`.
    MomentumSgd { beta1: f64 },
    #[serde(rename = "gclip")]
    GClip,
    #[serde(rename = "proj_gclip")]
    ProjGClip,
    #[serde(rename = "cclip")]
    CClip,
    #[serde(rename = "acclip")]
    ACClip(ACClipParams),
    /// RMSProp/Adam-style update without bias correction.
    AdamLike { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Sgd => "sgd",
            Algorithm::MomentumSgd { .. } => "momentum_sgd",
            Algorithm::GClip => "gclip",
            Algorithm::ProjGClip => "proj_gclip",
            Algorithm::CClip => "cclip",
            Algorithm::ACClip(_) => "acclip",
            Algorithm::AdamLike { .. } => "adam_like",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Algorithm::MomentumSgd { beta1 } if !(0.0..1.0).contains(beta1) => {
                config("momentum beta1 must lie in [0, 1)")
            }
            Algorithm::ACClip(p) => p.validate(),
            Algorithm::AdamLike { beta1, beta2, epsilon } => {
                if !(0.0..1.0).contains(beta1) || !(0.0..1.0).contains(beta2) || !(*epsilon >= 0.0) {
                    config("adam_like needs betas in [0, 1) and epsilon >= 0")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Which point the recorded suboptimality is measured at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPoint {
    #[default]
    Last,
    /// `x̄_k = Σ j·x_{j−1} / Σ j`.
    WeightedAverage,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RecordStride {
    Every { n: u64 },
    /// `k = round(10^{i/per_decade})` for `i = 0, 1, …`, so every power of
    /// ten is recorded. Ten per decade spaces records by about 1.26×.
    Log { per_decade: u32 },
}

impl Default for RecordStride {
    fn default() -> Self {
        RecordStride::Log { per_decade: 10 }
    }
}

impl RecordStride {
    /// First recorded step.
    pub fn first(&self) -> u64 {
        match self {
            RecordStride::Every { n } => (*n).max(1),
            RecordStride::Log { .. } => 1,
        }
    }

    /// Smallest recorded step after `k`.
    pub fn next(&self, k: u64) -> u64 {
        match self {
            RecordStride::Every { n } => k + (*n).max(1),
            RecordStride::Log { per_decade } => {
                let n = f64::from((*per_decade).max(1));
                let mut i = (n * (k.max(1) as f64).log10()).floor().max(0.0) - 1.0;
                loop {
                    let c = 10f64.powf(i / n).round() as u64;
                    if c > k {
                        return c;
                    }
                    i += 1.0;
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            RecordStride::Every { n: 0 } => config("record stride must be positive"),
            RecordStride::Log { per_decade: 0 } => config("per_decade must be positive"),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem1Preset {
    /// The max-expression with the `(f₀/(σ²K))^{α/(3α−2)}` term.
    #[default]
    Statement,
    /// The simpler `σ·K^{1/(3α−2)}` term.
    Proof,
}

/// Declarative schedule, resolved against problem constants at run time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Constant {
        eta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<f64>,
    },
    /// `η_k = c/(k+1)`, optional `τ_k = tau·k^tau_exponent`.
    InverseTime {
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau_exponent: Option<f64>,
    },
    /// Constant `η`, `τ_k = base·k^exponent`.
    PowerThreshold { eta: f64, base: f64, exponent: f64 },
    Theorem1 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f0: Option<f64>,
        #[serde(default)]
        preset: Theorem1Preset,
    },
    /// `η_k = 4/(μ(k+1))`, `τ_k = G·k^{exponent}` (default `1/α`). With
    /// CClip the per-coordinate bounds `B_i` replace `G`.
    Theorem2 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent: Option<f64>,
    },
}

impl ScheduleSpec {
    /// Concrete schedule for `problem` started at `x0`.
    pub fn resolve<T: Scalar, P: StochasticProblem<T>>(
        &self,
        problem: &P,
        algorithm: &Algorithm,
        iterations: u64,
        x0: &[T],
    ) -> Result<Schedule<T>> {
        let c = problem.constants();
        match self {
            ScheduleSpec::Constant { eta, tau } => {
                positive(*eta, "eta")?;
                Ok(Schedule::constant(T::of(*eta), T::of(tau.unwrap_or(f64::INFINITY))))
            }
            ScheduleSpec::InverseTime { c: cc, tau, tau_exponent } => {
                positive(*cc, "c")?;
                let threshold = match tau {
                    None => ThresholdRule::Infinite,
                    Some(t) => ThresholdRule::Power {
                        base: T::of(*t),
                        exponent: T::of(tau_exponent.unwrap_or(0.0)),
                    },
                };
                Ok(Schedule::new(
                    StepRule::InverseTime(T::of(*cc)),
                    threshold,
                    format!("inverse_time(c={cc})"),
                ))
            }
            ScheduleSpec::PowerThreshold { eta, base, exponent } => {
                positive(*eta, "eta")?;
                positive(*base, "base")?;
                Ok(Schedule::new(
                    StepRule::Constant(T::of(*eta)),
                    ThresholdRule::Power {
                        base: T::of(*base),
                        exponent: T::of(*exponent),
                    },
                    format!("power_threshold(eta={eta},base={base},exp={exponent})"),
                ))
            }
            ScheduleSpec::Theorem1 { l, sigma, alpha, f0, preset } => {
                let l = l
                    .map(T::of)
                    .or(c.smoothness)
                    .ok_or(Error::MissingConstant("L"))?;
                let (sigma, alpha) = match (sigma, alpha, c.sigma_alpha) {
                    (Some(s), Some(a), _) => (T::of(*s), T::of(*a)),
                    (s, a, Some((cs, ca))) => (s.map(T::of).unwrap_or(cs), a.map(T::of).unwrap_or(ca)),
                    (None, _, None) => return Err(Error::MissingConstant("sigma")),
                    (_, None, None) => return Err(Error::MissingConstant("alpha")),
                };
                let f0 = match f0 {
                    Some(v) => T::of(*v),
                    None => {
                        let (_, fstar) = problem.optimum().ok_or(Error::MissingConstant("f0"))?;
                        problem.value(x0) - fstar
                    }
                };
                theorem1_schedule(l, sigma, alpha, iterations, f0, *preset == Theorem1Preset::Proof)
            }
            ScheduleSpec::Theorem2 { mu, g, alpha, exponent } => {
                let mu = mu
                    .map(T::of)
                    .or(c.strong_convexity)
                    .ok_or(Error::MissingConstant("mu"))?;
                let coordinate = if *algorithm == Algorithm::CClip && g.is_none() {
                    c.coordinate_bounds.as_ref()
                } else {
                    None
                };
                let alpha = alpha
                    .map(T::of)
                    .or(coordinate.map(|(_, a)| *a))
                    .or(c.g_alpha.map(|(_, a)| a))
                    .ok_or(Error::MissingConstant("alpha"))?;
                let exponent = exponent.map(T::of).unwrap_or(T::one() / alpha);
                if let Some((b, _)) = coordinate {
                    let base = theorem2_schedule_with_exponent(mu, T::one(), alpha, exponent)?;
                    return Ok(Schedule::new(
                        base.step,
                        ThresholdRule::CoordinatePower {
                            base: b.clone(),
                            exponent,
                        },
                        format!("theorem2_coordinate(mu={mu},alpha={alpha},exp={exponent})"),
                    ));
                }
                let g = g
                    .map(T::of)
                    .or(c.g_alpha.map(|(g, _)| g))
                    .ok_or(Error::MissingConstant("G"))?;
                theorem2_schedule_with_exponent(mu, g, alpha, exponent)
            }
        }
    }
}

fn positive(v: f64, name: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        config(format!("schedule parameter `{name}` must be positive, got {v}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub schedule: ScheduleSpec,
    pub iterations: u64,
    #[serde(default)]
    pub record_stride: RecordStride,
    #[serde(default)]
    pub evaluate_at: EvalPoint,
    /// Starting point; zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, schedule: ScheduleSpec, iterations: u64) -> Self {
        OptimizerConfig {
            algorithm,
            schedule,
            iterations,
            record_stride: RecordStride::default(),
            evaluate_at: EvalPoint::Last,
            x0: None,
        }
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_stride(mut self, stride: RecordStride) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_eval(mut self, at: EvalPoint) -> Self {
        self.evaluate_at = at;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return config("iterations must be at least 1");
        }
        self.record_stride.validate()?;
        self.algorithm.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recorded(stride: RecordStride, last: u64) -> Vec<u64> {
        let mut out = vec![stride.first()];
        while *out.last().unwrap() < last {
            let k = stride.next(*out.last().unwrap());
            out.push(k);
        }
        out
    }

    #[test]
    fn log_stride_hits_powers_of_ten() {
        let ks = recorded(RecordStride::default(), 100_000);
        for p in [1, 10, 100, 1000, 10_000, 100_000] {
            assert!(ks.contains(&p), "{p} missing");
        }
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(&ks[..12], &[1, 2, 3, 4, 5, 6, 8, 10, 13, 16, 20, 25]);
    }

    #[test]
    fn every_stride() {
        assert_eq!(recorded(RecordStride::Every { n: 3 }, 9), vec![3, 6, 9]);
    }

    #[test]
    fn rejects_zero_iterations() {
        let c = OptimizerConfig::new(Algorithm::Sgd, ScheduleSpec::Constant { eta: 0.1, tau: None }, 0);
        assert!(c.validate().is_err());
    }
}
