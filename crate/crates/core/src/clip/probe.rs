use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gclip_in_place;
use crate::error::{check_dim, config, Result};
use crate::noise::{MomentAccumulator, MomentEstimate, NoiseSpec};

/// Analytic second-moment and bias bounds for globally clipped gradients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipBounds {
    /// Bound on `E‖ĝ‖²`.
    pub second_moment: f64,
    /// Bound on `‖E[ĝ] − ∇f‖` (square root of the squared-bias bound).
    pub bias_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeResult {
    pub tau: f64,
    pub alpha: f64,
    pub sample_count: usize,
    pub second_moment: f64,
    pub second_moment_se: f64,
    pub bias_norm: f64,
    pub bias_se: f64,
    /// Empirical `E‖g‖^α` (estimates `G^α`).
    pub g_moment: MomentEstimate,
    /// Empirical `E‖g − ∇f‖^α` (estimates `σ^α`).
    pub sigma_moment: MomentEstimate,
    /// `E‖ĝ‖² ≤ G^α τ^{2−α}`, `bias² ≤ G^{2α} τ^{−2(α−1)}`.
    pub general: ClipBounds,
    /// `E‖ĝ‖² ≤ 2‖∇f‖² + 4σ^α τ^{2−α}`, `bias² ≤ 4σ^{2α} τ^{−2(α−1)}`;
    /// only valid when `‖∇f‖ ≤ τ/2`.
    pub smooth: Option<ClipBounds>,
    /// Fraction of draws that were clipped.
    pub clip_rate: f64,
}

impl ProbeResult {
    /// Tightest applicable bounds.
    pub fn tightest(&self) -> ClipBounds {
        match self.smooth {
            Some(s) => ClipBounds {
                second_moment: s.second_moment.min(self.general.second_moment),
                bias_norm: s.bias_norm.min(self.general.bias_norm),
            },
            None => self.general,
        }
    }

    /// Both empirical quantities sit under every applicable bound, with
    /// `z` standard errors of slack.
    pub fn within_bounds(&self, z: f64) -> bool {
        let ok = |b: &ClipBounds| {
            self.second_moment <= b.second_moment + z * self.second_moment_se
                && self.bias_norm <= b.bias_norm + z * self.bias_se
        };
        ok(&self.general) && self.smooth.as_ref().map_or(true, ok)
    }
}

struct TauAccumulator {
    tau: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    sq: MomentAccumulator,
    clipped: usize,
}

/// Bias–variance probe of global clipping for every `τ` in `taus`, all
/// sharing the same `n` draws `g = ∇f + ξ`.
pub fn bias_variance_grid<R: Rng + ?Sized>(
    noise: &NoiseSpec,
    true_grad: &[f64],
    taus: &[f64],
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<ProbeResult>> {
    noise.validate()?;
    check_dim(noise.dimension, true_grad.len())?;
    if n < 2 {
        return config("probe needs at least 2 draws");
    }
    if !(alpha > 1.0 && alpha <= 2.0) {
        return config("probe exponent alpha must lie in (1, 2]");
    }
    if taus.iter().any(|&t| !(t > 0.0)) {
        return config("probe thresholds must be positive");
    }
    let d = true_grad.len();
    let mut accs: Vec<TauAccumulator> = taus
        .iter()
        .map(|&tau| TauAccumulator {
            tau,
            mean: vec![0.0; d],
            m2: vec![0.0; d],
            sq: MomentAccumulator::new(1.0),
            clipped: 0,
        })
        .collect();
    let mut g_acc = MomentAccumulator::new(alpha);
    let mut s_acc = MomentAccumulator::new(alpha);
    let mut xi = vec![0.0f64; d];
    let mut g = vec![0.0f64; d];
    let mut gh = vec![0.0f64; d];
    for t in 0..n {
        noise.sample_into(rng, &mut xi);
        let mut xi_sq = 0.0;
        let mut g_sq = 0.0;
        for i in 0..d {
            g[i] = true_grad[i] + xi[i];
            xi_sq += xi[i] * xi[i];
            g_sq += g[i] * g[i];
        }
        s_acc.push_norm(xi_sq.sqrt());
        g_acc.push_norm(g_sq.sqrt());
        for acc in accs.iter_mut() {
            gh.copy_from_slice(&g);
            let c = gclip_in_place(&mut gh, acc.tau);
            if c < 1.0 {
                acc.clipped += 1;
            }
            let mut norm_sq = 0.0;
            let k = (t + 1) as f64;
            for i in 0..d {
                let v = gh[i];
                norm_sq += v * v;
                let delta = v - acc.mean[i];
                acc.mean[i] += delta / k;
                acc.m2[i] += delta * (v - acc.mean[i]);
            }
            acc.sq.push_value(norm_sq);
        }
    }
    let g_moment = g_acc.finish()?;
    let sigma_moment = s_acc.finish()?;
    let grad_norm = true_grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nf = n as f64;
    let results = accs
        .into_iter()
        .map(|acc| {
            let tau = acc.tau;
            let sq = acc.sq.finish().expect("n >= 2");
            let bias_sq: f64 = acc
                .mean
                .iter()
                .zip(true_grad)
                .map(|(m, t)| (m - t).powi(2))
                .sum();
            let var_sum: f64 = acc.m2.iter().map(|s| s / (nf - 1.0)).sum();
            let general = ClipBounds {
                second_moment: g_moment.value * tau.powf(2.0 - alpha),
                bias_norm: g_moment.value * tau.powf(1.0 - alpha),
            };
            let smooth = (grad_norm <= tau / 2.0).then(|| ClipBounds {
                second_moment: 2.0 * grad_norm * grad_norm
                    + 4.0 * sigma_moment.value * tau.powf(2.0 - alpha),
                bias_norm: 2.0 * sigma_moment.value * tau.powf(1.0 - alpha),
            });
            ProbeResult {
                tau,
                alpha,
                sample_count: n,
                second_moment: sq.value,
                second_moment_se: sq.standard_error,
                bias_norm: bias_sq.sqrt(),
                bias_se: (var_sum / nf).sqrt(),
                g_moment,
                sigma_moment,
                general,
                smooth,
                clip_rate: acc.clipped as f64 / nf,
            }
        })
        .collect();
    Ok(results)
}

/// Single-threshold bias–variance probe.
pub fn bias_variance_probe<R: Rng + ?Sized>(
    noise: &NoiseSpec,
    true_grad: &[f64],
    tau: f64,
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> Result<ProbeResult> {
    Ok(bias_variance_grid(noise, true_grad, &[tau], alpha, n, rng)?.remove(0))
}
