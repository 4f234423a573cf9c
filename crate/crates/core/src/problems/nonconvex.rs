use rand::Rng;

use super::{Constants, StochasticProblem};
use crate::error::Result;
use crate::noise::NoiseSpec;
use crate::scalar::Scalar;

/// `f(x) = Σ x_i²/(1 + x_i²)`: smooth, bounded, nonconvex, `L = 2`,
/// global minimum 0 at the origin.
#[derive(Clone, Debug)]
pub struct NonconvexProblem<T> {
    dimension: usize,
    noise: NoiseSpec,
    constants: Constants<T>,
    origin: Vec<T>,
}

pub fn nonconvex_problem<T: Scalar>(dimension: usize, noise: NoiseSpec) -> Result<NonconvexProblem<T>> {
    if dimension == 0 {
        return crate::error::config("dimension must be positive");
    }
    crate::error::check_dim(dimension, noise.dimension)?;
    noise.validate()?;
    Ok(NonconvexProblem {
        dimension,
        noise,
        constants: Constants {
            smoothness: Some(T::of(2.0)),
            ..Constants::default()
        },
        origin: vec![T::zero(); dimension],
    })
}

impl<T: Scalar> NonconvexProblem<T> {
    pub fn constants_mut(&mut self) -> &mut Constants<T> {
        &mut self.constants
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }
}

#[inline]
fn term_grad<T: Scalar>(x: T) -> T {
    let q = T::one() + x * x;
    T::of(2.0) * x / (q * q)
}

impl<T: Scalar> StochasticProblem<T> for NonconvexProblem<T> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &[T]) -> T {
        x.iter().fold(T::zero(), |acc, &v| acc + v * v / (T::one() + v * v))
    }

    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = term_grad(v);
        }
    }

    fn noisy_gradient_into<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R, out: &mut [T]) {
        self.noise.sample_into(rng, out);
        for (o, &v) in out.iter_mut().zip(x) {
            *o = *o + term_grad(v);
        }
    }

    fn constants(&self) -> &Constants<T> {
        &self.constants
    }

    fn optimum(&self) -> Option<(&[T], T)> {
        Some((&self.origin, T::zero()))
    }

    fn id(&self) -> String {
        format!("nonconvex(d={},noise={})", self.dimension, self.noise.family.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let p = nonconvex_problem::<f64>(1, NoiseSpec::zero(1)).unwrap();
        assert_eq!(p.value(&[0.0]), 0.0);
        assert_eq!(p.exact_gradient(&[0.0]), vec![0.0]);
        assert_eq!(p.value(&[1.0]), 0.5);
        assert_eq!(p.exact_gradient(&[1.0]), vec![0.5]);
    }

    #[test]
    fn curvature_bounded_by_two() {
        // second derivative of x²/(1+x²) is (2 − 6x²)/(1+x²)³
        let mut worst = 0.0f64;
        for i in -4000..=4000 {
            let x = i as f64 * 1e-3;
            let h = (2.0 - 6.0 * x * x) / (1.0 + x * x).powi(3);
            worst = worst.max(h.abs());
        }
        assert!(worst <= 2.0 + 1e-12);
    }
}
