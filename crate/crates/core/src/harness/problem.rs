use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{CalibrationTarget, ExperimentConfig, ProblemConfig};
use crate::error::{config, Result};
use crate::problems::{
    estimate_coordinate_bounds, estimate_g, estimate_sigma, nonconvex_problem, quadratic_problem, ChainInstance,
    Constants, Domain, LowerBoundInstance, NonconvexProblem, QuadraticProblem, StochasticProblem,
};
use crate::rng::Seed;

/// Auxiliary stream tag for calibration draws.
const CALIBRATION_TAG: u64 = 0xCA1;

/// Any problem the harness can build from a config.
#[derive(Clone, Debug)]
pub enum BuiltProblem {
    Quadratic(QuadraticProblem<f64>),
    Nonconvex(NonconvexProblem<f64>),
    Lowerbound(LowerBoundInstance<f64>),
    Chain(ChainInstance<f64>),
}

macro_rules! delegate {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            BuiltProblem::Quadratic($p) => $e,
            BuiltProblem::Nonconvex($p) => $e,
            BuiltProblem::Lowerbound($p) => $e,
            BuiltProblem::Chain($p) => $e,
        }
    };
}

impl StochasticProblem<f64> for BuiltProblem {
    fn dimension(&self) -> usize {
        delegate!(self, p => p.dimension())
    }

    fn value(&self, x: &[f64]) -> f64 {
        delegate!(self, p => p.value(x))
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        delegate!(self, p => p.gradient_into(x, out))
    }

    fn noisy_gradient_into<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        delegate!(self, p => p.noisy_gradient_into(x, rng, out))
    }

    fn constants(&self) -> &Constants<f64> {
        delegate!(self, p => p.constants())
    }

    fn domain(&self) -> Option<&Domain<f64>> {
        delegate!(self, p => p.domain())
    }

    fn optimum(&self) -> Option<(&[f64], f64)> {
        delegate!(self, p => p.optimum())
    }

    fn id(&self) -> String {
        delegate!(self, p => p.id())
    }
}

/// Constants estimated at the starting point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub alpha: Option<f64>,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate_bounds: Option<Vec<f64>>,
}

/// Builds the configured problem, estimating whatever constants the
/// schedule and checks need. Calibration draws come from a stream separate
/// from every run's stream.
pub fn build_problem(cfg: &ExperimentConfig, master: u64) -> Result<(BuiltProblem, Calibration)> {
    let mut problem = match &cfg.problem {
        ProblemConfig::Quadratic {
            mu,
            dimension,
            x_star,
            noise,
            domain,
        } => {
            let q = quadratic_problem(*mu, *dimension, x_star.expand(*dimension)?, noise.spec(*dimension))?;
            BuiltProblem::Quadratic(match domain {
                Some(d) => q.with_domain(d.clone())?,
                None => q,
            })
        }
        ProblemConfig::Nonconvex { dimension, noise } => {
            BuiltProblem::Nonconvex(nonconvex_problem(*dimension, noise.spec(*dimension))?)
        }
        ProblemConfig::Lowerbound { epsilon, alpha, nu } => {
            BuiltProblem::Lowerbound(LowerBoundInstance::new(*epsilon, *alpha, *nu)?)
        }
        ProblemConfig::Chain {
            dimension,
            p,
            lambda,
            gradient_scale,
        } => BuiltProblem::Chain(ChainInstance::scaled(*dimension, *p, *lambda, *gradient_scale)?),
    };

    let mut targets = cfg.schedule_needs();
    if let Some(c) = &cfg.calibration {
        targets.extend(c.targets.iter().copied());
    }
    targets.sort_by_key(|t| *t as u8);
    targets.dedup();
    // Targets the problem already declares need no estimation.
    let known = problem.constants().clone();
    targets.retain(|t| match t {
        CalibrationTarget::G => known.g_alpha.is_none(),
        CalibrationTarget::Sigma => known.sigma_alpha.is_none(),
        CalibrationTarget::CoordinateBounds => known.coordinate_bounds.is_none(),
    });

    let mut cal = Calibration {
        alpha: known.g_alpha.map(|(_, a)| a),
        g: known.g_alpha.map(|(g, _)| g),
        ..Calibration::default()
    };
    if targets.is_empty() {
        return Ok((problem, cal));
    }
    let Some(cc) = &cfg.calibration else {
        return config(format!(
            "constants {targets:?} are needed but no [calibration] section is given"
        ));
    };
    let d = problem.dimension();
    let x0: Vec<f64> = cfg.optimizer.x0.clone().unwrap_or_else(|| vec![0.0; d]);
    let mut rng = Seed::new(master).aux(CALIBRATION_TAG).rng();
    let a = cc.alpha;
    cal.alpha = Some(a);
    cal.samples = cc.samples;
    let mut estimated = known.clone();
    for t in &targets {
        match t {
            CalibrationTarget::G => {
                let m = estimate_g(&problem, &x0, a, cc.samples, &mut rng)?;
                let g = m.root();
                cal.g = Some(g);
                cal.g_se = Some(m.standard_error);
                estimated.g_alpha = Some((g, a));
            }
            CalibrationTarget::Sigma => {
                let s = estimate_sigma(&problem, &x0, a, cc.samples, &mut rng)?.root();
                cal.sigma = Some(s);
                estimated.sigma_alpha = Some((s, a));
            }
            CalibrationTarget::CoordinateBounds => {
                let b: Vec<f64> = estimate_coordinate_bounds(&problem, &x0, a, cc.samples, &mut rng)?
                    .iter()
                    .map(|m| m.root())
                    .collect();
                cal.coordinate_bounds = Some(b.clone());
                estimated.coordinate_bounds = Some((b, a));
            }
        }
    }
    match &mut problem {
        BuiltProblem::Quadratic(q) => *q.constants_mut() = estimated,
        BuiltProblem::Nonconvex(n) => *n.constants_mut() = estimated,
        _ => return config("calibration is only supported for quadratic and nonconvex problems"),
    }
    Ok((problem, cal))
}
