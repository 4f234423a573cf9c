use super::average::WeightedAverage;
use super::config::{Algorithm, EvalPoint, OptimizerConfig};
use super::schedule::ThresholdRule;
use super::trace::{Trace, TraceRecord};
use crate::clip::{cclip_in_place, gclip_in_place, ACClipState};
use crate::error::{check_dim, Error, Result};
use crate::problems::StochasticProblem;
use crate::rng::Seed;
use crate::scalar::{norm, Scalar};

/// Runs `config.iterations` steps of the configured algorithm on `problem`.
///
/// The output depends only on `(problem, config, seed)`.
pub fn run<T: Scalar, P: StochasticProblem<T>>(problem: &P, config: &OptimizerConfig, seed: Seed) -> Result<Trace> {
    config.validate()?;
    let d = problem.dimension();
    let mut x: Vec<T> = match &config.x0 {
        Some(x0) => {
            check_dim(d, x0.len())?;
            x0.iter().map(|&v| T::of(v)).collect()
        }
        None => vec![T::zero(); d],
    };
    let algorithm = &config.algorithm;
    let domain = match algorithm {
        Algorithm::ProjGClip => {
            let dom = problem
                .domain()
                .ok_or_else(|| Error::Config("projected GClip needs a problem domain".into()))?;
            check_dim(d, dom.dimension().unwrap_or(d))?;
            dom.project_in_place(&mut x);
            Some(dom)
        }
        _ => None,
    };
    let schedule = config.schedule.resolve(problem, algorithm, config.iterations, &x)?;
    if let ThresholdRule::CoordinatePower { base, .. } = &schedule.threshold {
        check_dim(d, base.len())?;
    }
    let fstar = problem.optimum().map(|(_, f)| f);

    let mut rng = seed.rng();
    let mut g = vec![T::zero(); d];
    let mut grad = vec![T::zero(); d];
    let mut taus = vec![T::zero(); d];
    let mut m = vec![T::zero(); d];
    let mut v = vec![T::zero(); d];
    let mut acclip = match algorithm {
        Algorithm::ACClip(p) => Some(ACClipState::new(x.clone(), *p)?),
        _ => None,
    };
    let mut avg = WeightedAverage::new(d);
    let mut min_stat_sum = 0.0f64;
    let mut grad_sq_sum = 0.0f64;
    let mut records = Vec::new();
    let mut next_record = config.record_stride.first();

    for k in 1..=config.iterations {
        avg.push(&x);
        problem.noisy_gradient_into(&x, &mut rng, &mut g);
        let eta = schedule.eta(k);
        let (clip_frac, eff_step) = match algorithm {
            Algorithm::Sgd => {
                sgd_update(&mut x, &g, eta);
                (0.0, eta.as_f64())
            }
            Algorithm::MomentumSgd { beta1 } => {
                let b1 = T::of(*beta1);
                for i in 0..d {
                    m[i] = b1 * m[i] + (T::one() - b1) * g[i];
                }
                sgd_update(&mut x, &m, eta);
                (0.0, eta.as_f64())
            }
            Algorithm::GClip | Algorithm::ProjGClip => {
                let c = gclip_in_place(&mut g, schedule.tau(k));
                sgd_update(&mut x, &g, eta);
                if let Some(dom) = domain {
                    dom.project_in_place(&mut x);
                }
                (if c < T::one() { 1.0 } else { 0.0 }, (eta * c).as_f64())
            }
            Algorithm::CClip => {
                schedule.tau_into(k, &mut taus);
                let mut factor = 0.0;
                for (gi, ti) in g.iter().zip(&taus) {
                    let a = gi.abs();
                    factor += if a > *ti { (*ti / a).as_f64() } else { 1.0 };
                }
                let clipped = cclip_in_place(&mut g, &taus);
                sgd_update(&mut x, &g, eta);
                (clipped as f64 / d as f64, eta.as_f64() * factor / d as f64)
            }
            Algorithm::ACClip(_) => {
                let state = acclip.as_mut().expect("acclip state");
                let (clipped, factor) = state.step_in_place(&g, eta, &mut m);
                x.copy_from_slice(&state.x);
                (clipped as f64 / d as f64, (eta * factor).as_f64())
            }
            Algorithm::AdamLike { beta1, beta2, epsilon } => {
                let (b1, b2, eps) = (T::of(*beta1), T::of(*beta2), T::of(*epsilon));
                let mut h_sum = 0.0;
                for i in 0..d {
                    m[i] = b1 * m[i] + (T::one() - b1) * g[i];
                    v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
                    let h = eta / (eps + v[i].sqrt());
                    h_sum += h.as_f64();
                    x[i] = x[i] - h * m[i];
                }
                (0.0, h_sum / d as f64)
            }
        };

        problem.gradient_into(&x, &mut grad);
        let gn = norm(&grad).as_f64();
        let gsq = gn * gn;
        min_stat_sum += gn.min(gsq);
        grad_sq_sum += gsq;

        if k == next_record || k == config.iterations {
            let suboptimality = fstar.map(|f| {
                let at = match config.evaluate_at {
                    EvalPoint::Last => problem.value(&x),
                    EvalPoint::WeightedAverage => problem.value(avg.value()),
                };
                (at - f).as_f64()
            });
            records.push(TraceRecord {
                k,
                suboptimality,
                grad_norm: gn,
                min_grad_stat: min_stat_sum / k as f64,
                grad_sq_mean: grad_sq_sum / k as f64,
                clip_frac,
                eff_step,
            });
            while next_record <= k {
                next_record = config.record_stride.next(next_record);
            }
        }
    }

    Ok(Trace {
        seed,
        algorithm: algorithm.label().to_string(),
        schedule: schedule.label.clone(),
        problem: problem.id(),
        records,
        final_x: x.iter().map(|v| v.as_f64()).collect(),
        final_average: avg.value().iter().map(|v| v.as_f64()).collect(),
    })
}

/// `x ← x − η·g`. Every plain-gradient update goes through here so that
/// reductions to SGD round identically.
#[inline]
fn sgd_update<T: Scalar>(x: &mut [T], g: &[T], eta: T) {
    for (xi, gi) in x.iter_mut().zip(g) {
        *xi = *xi - eta * *gi;
    }
}
