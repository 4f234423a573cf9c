use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

/// Least-squares fit of `log metric = intercept + slope·log k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub k_range: (f64, f64),
    pub n_points: usize,
}

/// Fits a power law to the `(k, value)` points with `k` in the inclusive
/// range. Nonpositive or non-finite values are dropped first.
pub fn fit_loglog_slope(points: &[(f64, f64)], k_range: (f64, f64)) -> Result<SlopeFit> {
    if !(k_range.0 < k_range.1) {
        return config("k_range must satisfy k_min < k_max");
    }
    let kept: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(k, v)| *k >= k_range.0 && *k <= k_range.1 && *k > 0.0 && *v > 0.0 && v.is_finite())
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = kept.iter().map(|&(k, v)| (k.ln(), v.ln())).unzip();
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, got: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return config("all points share one k");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // A flat series is fitted perfectly.
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        k_range: (kept[0].0, kept[n - 1].0),
        n_points: n,
    })
}
