use serde::{Deserialize, Serialize};

use crate::error::{check_dim, config, Result};
use crate::scalar::{norm, Scalar};

/// A global or per-coordinate clipping threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClipThreshold<T> {
    Global(T),
    Coordinate(Vec<T>),
}

impl<T: Scalar> ClipThreshold<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            ClipThreshold::Global(t) => *t >= T::zero(),
            ClipThreshold::Coordinate(ts) => ts.iter().all(|t| *t >= T::zero()),
        };
        if ok {
            Ok(())
        } else {
            config("clipping thresholds must be nonnegative")
        }
    }
}

/// Scale factor `min{τ/‖g‖, 1}` given `‖g‖`; 0 when `‖g‖ = 0`.
#[inline]
pub fn gclip_factor<T: Scalar>(g_norm: T, tau: T) -> T {
    if g_norm > T::zero() {
        (tau / g_norm).min(T::one())
    } else {
        T::zero()
    }
}

/// Global clipping in place; returns the applied factor.
#[inline]
pub fn gclip_in_place<T: Scalar>(g: &mut [T], tau: T) -> T {
    let n = if g.len() == 1 { g[0].abs() } else { norm(g) };
    let c = gclip_factor(n, tau);
    if c < T::one() {
        g.iter_mut().for_each(|v| *v = *v * c);
    }
    c
}

/// `min{τ/‖g‖, 1}·g`, with `g = 0` mapped to 0.
pub fn gclip<T: Scalar>(g: &[T], tau: T) -> Vec<T> {
    let mut out = g.to_vec();
    gclip_in_place(&mut out, tau);
    out
}

/// Coordinate-wise clipping in place; returns how many coordinates were
/// actually shrunk.
#[inline]
pub fn cclip_in_place<T: Scalar>(g: &mut [T], tau: &[T]) -> usize {
    let mut clipped = 0;
    for (v, &t) in g.iter_mut().zip(tau) {
        let a = v.abs();
        if a > t {
            // same rounding as the global operator in one dimension
            *v = *v * (t / a);
            clipped += 1;
        }
    }
    clipped
}

/// Elementwise `min{τ_i/|g_i|, 1}·g_i`.
pub fn cclip<T: Scalar>(g: &[T], tau: &[T]) -> Result<Vec<T>> {
    check_dim(g.len(), tau.len())?;
    let mut out = g.to_vec();
    cclip_in_place(&mut out, tau);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gclip_examples() {
        assert_eq!(gclip(&[3.0, 4.0], 10.0), vec![3.0, 4.0]);
        assert_eq!(gclip(&[3.0, 4.0], 2.5), vec![1.5, 2.0]);
        assert_eq!(gclip(&[0.0, 0.0], 1.0), vec![0.0, 0.0]);
        assert_eq!(gclip(&[3.0, 4.0], f64::INFINITY), vec![3.0, 4.0]);
        assert_eq!(gclip(&[3.0, 4.0], 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn cclip_examples() {
        assert_eq!(cclip(&[3.0, -4.0], &[2.0, 2.0]).unwrap(), vec![2.0, -2.0]);
        assert_eq!(cclip(&[0.5, -0.5], &[1.0, 1.0]).unwrap(), vec![0.5, -0.5]);
        assert_eq!(cclip(&[-5.0], &[0.0]).unwrap(), vec![0.0]);
        assert!(cclip(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn clipped_count() {
        let mut g = [3.0f32, 0.1, -7.0];
        assert_eq!(cclip_in_place(&mut g, &[1.0, 1.0, 1.0]), 2);
        assert_eq!(g, [1.0, 0.1, -1.0]);
    }

    #[test]
    fn threshold_validation() {
        assert!(ClipThreshold::Global(-1.0f64).validate().is_err());
        assert!(ClipThreshold::Coordinate(vec![1.0f64, -0.1]).validate().is_err());
        assert!(ClipThreshold::Coordinate(vec![0.0f64, 2.0]).validate().is_ok());
    }
}
