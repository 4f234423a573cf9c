use rand::Rng;

use super::{Constants, Domain, StochasticProblem};
use crate::error::{check_dim, config, Result};
use crate::noise::NoiseSpec;
use crate::scalar::Scalar;

/// `f(x) = (μ/2)‖x − x*‖²` with additive noise on the gradient.
#[derive(Clone, Debug)]
pub struct QuadraticProblem<T> {
    mu: T,
    x_star: Vec<T>,
    noise: NoiseSpec,
    domain: Option<Domain<T>>,
    constants: Constants<T>,
}

pub fn quadratic_problem<T: Scalar>(
    mu: T,
    dimension: usize,
    x_star: Vec<T>,
    noise: NoiseSpec,
) -> Result<QuadraticProblem<T>> {
    if !(mu > T::zero()) {
        return config("strong convexity mu must be positive");
    }
    check_dim(dimension, x_star.len())?;
    check_dim(dimension, noise.dimension)?;
    noise.validate()?;
    Ok(QuadraticProblem {
        mu,
        x_star,
        noise,
        domain: None,
        constants: Constants {
            smoothness: Some(mu),
            strong_convexity: Some(mu),
            ..Constants::default()
        },
    })
}

impl<T: Scalar> QuadraticProblem<T> {
    pub fn with_domain(mut self, domain: Domain<T>) -> Result<Self> {
        domain.validate()?;
        if let Some(d) = domain.dimension() {
            check_dim(self.x_star.len(), d)?;
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn constants_mut(&mut self) -> &mut Constants<T> {
        &mut self.constants
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn mu(&self) -> T {
        self.mu
    }
}

impl<T: Scalar> StochasticProblem<T> for QuadraticProblem<T> {
    fn dimension(&self) -> usize {
        self.x_star.len()
    }

    fn value(&self, x: &[T]) -> T {
        let half = T::of(0.5);
        half * self.mu
            * x.iter()
                .zip(&self.x_star)
                .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
    }

    #[inline]
    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        for ((o, &a), &b) in out.iter_mut().zip(x).zip(&self.x_star) {
            *o = self.mu * (a - b);
        }
    }

    #[inline]
    fn noisy_gradient_into<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R, out: &mut [T]) {
        self.noise.sample_into(rng, out);
        for ((o, &a), &b) in out.iter_mut().zip(x).zip(&self.x_star) {
            *o = *o + self.mu * (a - b);
        }
    }

    fn constants(&self) -> &Constants<T> {
        &self.constants
    }

    fn domain(&self) -> Option<&Domain<T>> {
        self.domain.as_ref()
    }

    fn optimum(&self) -> Option<(&[T], T)> {
        Some((&self.x_star, T::zero()))
    }

    fn id(&self) -> String {
        format!(
            "quadratic(mu={},d={},noise={})",
            self.mu,
            self.x_star.len(),
            self.noise.family.name()
        )
    }
}
