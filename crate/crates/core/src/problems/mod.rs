//! Stochastic objectives with exact values/gradients and noisy oracles.

mod chain;
mod domain;
mod lowerbound;
mod nonconvex;
mod quadratic;

use rand::Rng;

pub use chain::{chain_gradient, chain_oracle, chain_oracle_with, chain_value, phi, phi_prime, prog, psi, psi_prime, ChainInstance};
pub use domain::{project, Domain};
pub use lowerbound::{lowerbound_oracle, LowerBoundInstance};
pub use nonconvex::{nonconvex_problem, NonconvexProblem};
pub use quadratic::{quadratic_problem, QuadraticProblem};

use crate::noise::{MomentAccumulator, MomentEstimate};
use crate::scalar::{norm, Scalar};

/// Problem constants. Any of them may be unknown.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constants<T> {
    /// Smoothness `L`.
    pub smoothness: Option<T>,
    /// Strong convexity `μ`.
    pub strong_convexity: Option<T>,
    /// `(σ, α)` with `E‖g − ∇f‖^α ≤ σ^α`.
    pub sigma_alpha: Option<(T, T)>,
    /// `(G, α)` with `E‖g‖^α ≤ G^α`.
    pub g_alpha: Option<(T, T)>,
    /// `(B, α)` with `E|g_i|^α ≤ B_i^α` for every coordinate.
    pub coordinate_bounds: Option<(Vec<T>, T)>,
}

/// A differentiable objective with a stochastic first-order oracle.
pub trait StochasticProblem<T: Scalar>: Sync {
    fn dimension(&self) -> usize;

    fn value(&self, x: &[T]) -> T;

    fn gradient_into(&self, x: &[T], out: &mut [T]);

    /// One unbiased stochastic gradient at `x`, written into `out`.
    fn noisy_gradient_into<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R, out: &mut [T]);

    fn constants(&self) -> &Constants<T>;

    fn domain(&self) -> Option<&Domain<T>> {
        None
    }

    /// `(x*, f*)` when known.
    fn optimum(&self) -> Option<(&[T], T)> {
        None
    }

    /// Short identifier used in traces and reports.
    fn id(&self) -> String;

    fn exact_gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); self.dimension()];
        self.gradient_into(x, &mut g);
        g
    }

    fn noisy_gradient<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R) -> Vec<T> {
        let mut g = vec![T::zero(); self.dimension()];
        self.noisy_gradient_into(x, rng, &mut g);
        g
    }
}

/// Empirical `E‖g(x)‖^α` at a fixed point (estimates `G^α`).
pub fn estimate_g<T: Scalar, P: StochasticProblem<T>, R: Rng + ?Sized>(
    problem: &P,
    x: &[T],
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> crate::Result<MomentEstimate> {
    let mut acc = MomentAccumulator::new(alpha);
    let mut g = vec![T::zero(); problem.dimension()];
    for _ in 0..n {
        problem.noisy_gradient_into(x, rng, &mut g);
        acc.push_norm(norm(&g).as_f64());
    }
    acc.finish()
}

/// Empirical `E‖g(x) − ∇f(x)‖^α` at a fixed point (estimates `σ^α`).
pub fn estimate_sigma<T: Scalar, P: StochasticProblem<T>, R: Rng + ?Sized>(
    problem: &P,
    x: &[T],
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> crate::Result<MomentEstimate> {
    let mut acc = MomentAccumulator::new(alpha);
    let exact = problem.exact_gradient(x);
    let mut g = vec![T::zero(); problem.dimension()];
    for _ in 0..n {
        problem.noisy_gradient_into(x, rng, &mut g);
        let r = g
            .iter()
            .zip(&exact)
            .map(|(&a, &b)| {
                let d = (a - b).as_f64();
                d * d
            })
            .sum::<f64>()
            .sqrt();
        acc.push_norm(r);
    }
    acc.finish()
}

/// Per-coordinate empirical `(E|g_i(x)|^α)^(1/α)` (estimates `B_i`).
pub fn estimate_coordinate_bounds<T: Scalar, P: StochasticProblem<T>, R: Rng + ?Sized>(
    problem: &P,
    x: &[T],
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> crate::Result<Vec<MomentEstimate>> {
    let d = problem.dimension();
    let mut accs: Vec<MomentAccumulator> = (0..d).map(|_| MomentAccumulator::new(alpha)).collect();
    let mut g = vec![T::zero(); d];
    for _ in 0..n {
        problem.noisy_gradient_into(x, rng, &mut g);
        for (acc, v) in accs.iter_mut().zip(&g) {
            acc.push_norm(v.as_f64().abs());
        }
    }
    accs.iter().map(|a| a.finish()).collect()
}
