use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;

use super::{Constants, StochasticProblem};
use crate::error::{config, Result};
use crate::scalar::Scalar;

/// Nonconvex "zero chain" hard instance built from the Ψ/Φ chain function
/// `f_d`, plus its probability-`p` stochastic oracle.
///
/// As a [`StochasticProblem`] it represents the rescaled objective
/// `s·λ·f_d(x/λ)` with gradient `s·∇f_d(x/λ)`, where `s` is
/// `gradient_scale`. With `λ = s = 1` it is `f_d` itself.
#[derive(Clone, Debug)]
pub struct ChainInstance<T> {
    pub d: usize,
    pub lambda: T,
    pub gradient_scale: T,
    pub p: T,
    constants: Constants<T>,
}

impl<T: Scalar> ChainInstance<T> {
    pub fn new(d: usize, p: T) -> Result<Self> {
        Self::scaled(d, p, T::one(), T::one())
    }

    pub fn scaled(d: usize, p: T, lambda: T, gradient_scale: T) -> Result<Self> {
        if d == 0 {
            return config("chain length must be positive");
        }
        if !(p > T::zero() && p <= T::one()) {
            return config("chain probability must lie in (0, 1]");
        }
        if !(lambda > T::zero() && gradient_scale > T::zero()) {
            return config("chain scaling must be positive");
        }
        Ok(ChainInstance {
            d,
            lambda,
            gradient_scale,
            p,
            constants: Constants {
                smoothness: Some(T::of(152.0) * gradient_scale / lambda),
                ..Constants::default()
            },
        })
    }
}

/// `Ψ(x) = 0` for `x ≤ ½`, `exp(1 − 1/(2x − 1)²)` otherwise.
#[inline]
pub fn psi(x: f64) -> f64 {
    if x <= 0.5 {
        0.0
    } else {
        let t = 2.0 * x - 1.0;
        (1.0 - 1.0 / (t * t)).exp()
    }
}

#[inline]
pub fn psi_prime(x: f64) -> f64 {
    if x <= 0.5 {
        0.0
    } else {
        let t = 2.0 * x - 1.0;
        psi(x) * 4.0 / (t * t * t)
    }
}

/// `Φ(x) = √e ∫_{−∞}^x e^{−t²/2} dt = √e·√(π/2)·erfc(−x/√2)`.
#[inline]
pub fn phi(x: f64) -> f64 {
    0.5f64.exp() * (PI / 2.0).sqrt() * libm::erfc(-x * FRAC_1_SQRT_2)
}

#[inline]
pub fn phi_prime(x: f64) -> f64 {
    (0.5 - 0.5 * x * x).exp()
}

/// Highest 1-based index `i` with `|x_i| > β`, or 0.
pub fn prog<T: Scalar>(x: &[T], beta: T) -> usize {
    x.iter().rposition(|v| v.abs() > beta).map_or(0, |i| i + 1)
}

/// `f_d(x)` for the unscaled chain.
pub fn chain_value<T: Scalar>(inst: &ChainInstance<T>, x: &[T]) -> T {
    debug_assert_eq!(x.len(), inst.d);
    let mut prev = 1.0;
    let mut total = 0.0;
    for v in x {
        let v = v.as_f64();
        total += psi(-prev) * phi(-v) - psi(prev) * phi(v);
        prev = v;
    }
    T::of(total)
}

fn chain_gradient_f64(x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for j in 0..d {
        let prev = if j == 0 { 1.0 } else { x[j - 1] };
        let v = x[j];
        let mut g = -psi(-prev) * phi_prime(-v) - psi(prev) * phi_prime(v);
        if j + 1 < d {
            let next = x[j + 1];
            g += -psi_prime(-v) * phi(-next) - psi_prime(v) * phi(next);
        }
        out[j] = g;
    }
}

/// `∇f_d(x)` for the unscaled chain.
pub fn chain_gradient<T: Scalar>(inst: &ChainInstance<T>, x: &[T]) -> Vec<T> {
    debug_assert_eq!(x.len(), inst.d);
    let xf: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
    let mut g = vec![0.0; inst.d];
    chain_gradient_f64(&xf, &mut g);
    g.into_iter().map(T::of).collect()
}

/// Oracle output for a fixed Bernoulli outcome `z`: coordinate
/// `prog_¼(x) + 1` of `∇f_d(x)` is multiplied by `z/p`.
pub fn chain_oracle_with<T: Scalar>(inst: &ChainInstance<T>, x: &[T], z: bool) -> Vec<T> {
    let mut g = chain_gradient(inst, x);
    let idx = prog(x, T::of(0.25));
    if idx < inst.d {
        let factor = if z { T::one() / inst.p } else { T::zero() };
        g[idx] = g[idx] * factor;
    }
    g
}

/// Probability-`p` zero-chain oracle for `f_d`.
pub fn chain_oracle<T: Scalar, R: Rng + ?Sized>(inst: &ChainInstance<T>, x: &[T], rng: &mut R) -> Vec<T> {
    let z = rng.random::<f64>() < inst.p.as_f64();
    chain_oracle_with(inst, x, z)
}

impl<T: Scalar> StochasticProblem<T> for ChainInstance<T> {
    fn dimension(&self) -> usize {
        self.d
    }

    fn value(&self, x: &[T]) -> T {
        let inner: Vec<T> = x.iter().map(|&v| v / self.lambda).collect();
        self.gradient_scale * self.lambda * chain_value(self, &inner)
    }

    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        let inner: Vec<T> = x.iter().map(|&v| v / self.lambda).collect();
        for (o, g) in out.iter_mut().zip(chain_gradient(self, &inner)) {
            *o = self.gradient_scale * g;
        }
    }

    fn noisy_gradient_into<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R, out: &mut [T]) {
        let inner: Vec<T> = x.iter().map(|&v| v / self.lambda).collect();
        for (o, g) in out.iter_mut().zip(chain_oracle(self, &inner, rng)) {
            *o = self.gradient_scale * g;
        }
    }

    fn constants(&self) -> &Constants<T> {
        &self.constants
    }

    fn id(&self) -> String {
        format!("chain(d={},p={})", self.d, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_values() {
        assert_eq!(psi(1.0), 1.0);
        assert_eq!(psi(0.5), 0.0);
        assert_eq!(psi(-3.0), 0.0);
        assert_eq!(psi_prime(0.5), 0.0);
    }

    #[test]
    fn phi_at_zero_matches_quadrature() {
        // Simpson on √e·∫_{-40}^0 e^{-t²/2} dt
        let n = 200_000;
        let (a, b) = (-40.0f64, 0.0f64);
        let h = (b - a) / n as f64;
        let f = |t: f64| (-t * t / 2.0).exp();
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        let quad = 0.5f64.exp() * s * h / 3.0;
        assert!((phi(0.0) - quad).abs() < 1e-10);
        assert!((phi(0.0) - 2.06637).abs() < 1e-5);
    }

    #[test]
    fn prog_scans_from_the_top() {
        assert_eq!(prog(&[0.0, 1.0, 0.0, 2.0], 0.0), 4);
        assert_eq!(prog(&[0.4, 0.6, 0.1], 0.5), 2);
        assert_eq!(prog(&[0.0f64; 5], 0.3), 0);
        assert_eq!(prog(&[0.25f64], 0.25), 0);
    }

    #[test]
    fn value_at_origin() {
        let inst = ChainInstance::new(4, 0.5f64).unwrap();
        assert!((chain_value(&inst, &[0.0; 4]) + phi(0.0)).abs() < 1e-15);
    }

    #[test]
    fn oracle_forced_outcomes() {
        let inst = ChainInstance::new(5, 1.0f64).unwrap();
        let x = [0.9, 0.3, 0.1, -0.05, 0.0];
        assert_eq!(chain_oracle_with(&inst, &x, true), chain_gradient(&inst, &x));

        let inst = ChainInstance::new(5, 0.3f64).unwrap();
        let exact = chain_gradient(&inst, &x);
        let g = chain_oracle_with(&inst, &x, false);
        // prog_¼(x) = 2, so coordinate index 2 (0-based) is zeroed
        for i in 0..5 {
            if i == 2 {
                assert_eq!(g[i], 0.0);
            } else {
                assert_eq!(g[i], exact[i]);
            }
        }
    }

    #[test]
    fn oracle_untouched_at_full_progress() {
        let inst = ChainInstance::new(3, 0.2f64).unwrap();
        let x = [1.0, 1.0, 1.0];
        assert_eq!(chain_oracle_with(&inst, &x, false), chain_gradient(&inst, &x));
    }
}
