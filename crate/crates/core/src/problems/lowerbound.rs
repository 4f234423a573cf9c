use rand::Rng;

use super::{Constants, Domain, StochasticProblem};
use crate::error::{config, Error, Result};
use crate::scalar::Scalar;

/// One-dimensional strongly convex hard instance: `f_b(x) = ½(x − b)²` on
/// `[0, ½]` whose oracle returns `x − 1/(2γ)` with probability `p_ν` and `x`
/// otherwise, so the only information about `ν` is an event frequency.
#[derive(Clone, Debug)]
pub struct LowerBoundInstance<T> {
    pub epsilon: T,
    pub alpha: T,
    pub nu: u8,
    b: T,
    gamma: T,
    p: T,
    x_star: [T; 1],
    domain: Domain<T>,
    constants: Constants<T>,
}

impl<T: Scalar> LowerBoundInstance<T> {
    pub fn new(epsilon: T, alpha: T, nu: u8) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon <= T::of(0.125)) {
            return config("epsilon must lie in (0, 1/8]");
        }
        if !(alpha > T::one() && alpha <= T::of(2.0)) {
            return config("alpha must lie in (1, 2]");
        }
        if nu > 1 {
            return config("nu must be 0 or 1");
        }
        let nu_t = T::of(nu as f64);
        let b = (T::of(2.0) - nu_t) * epsilon;
        let gamma = (T::of(4.0) * epsilon).powf(T::one() / (alpha - T::one()));
        let p = gamma.powf(alpha) - T::of(2.0) * nu_t * gamma * epsilon;
        Ok(LowerBoundInstance {
            epsilon,
            alpha,
            nu,
            b,
            gamma,
            p,
            x_star: [b],
            domain: Domain::Interval {
                lo: T::zero(),
                hi: T::of(0.5),
            },
            constants: Constants {
                smoothness: Some(T::one()),
                strong_convexity: Some(T::one()),
                g_alpha: Some((T::one(), alpha)),
                ..Constants::default()
            },
        })
    }

    /// Minimizer `b_ν = (2 − ν)ε`.
    pub fn b(&self) -> T {
        self.b
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// Probability `p_ν` of the large-step event.
    pub fn p(&self) -> T {
        self.p
    }

    /// `∇f_b(x) = x − b`.
    pub fn gradient(&self, x: T) -> T {
        x - self.b
    }

    /// Oracle output for a given event outcome.
    pub fn oracle_with(&self, x: T, event: bool) -> T {
        if event {
            x - T::one() / (T::of(2.0) * self.gamma)
        } else {
            x
        }
    }
}

/// Draw `g(x)` for `x ∈ [0, ½]`.
pub fn lowerbound_oracle<T: Scalar, R: Rng + ?Sized>(
    inst: &LowerBoundInstance<T>,
    x: T,
    rng: &mut R,
) -> Result<T> {
    if !(x >= T::zero() && x <= T::of(0.5)) {
        return Err(Error::Domain(format!("{x} is outside [0, 1/2]")));
    }
    let event = rng.random::<f64>() < inst.p.as_f64();
    Ok(inst.oracle_with(x, event))
}

impl<T: Scalar> StochasticProblem<T> for LowerBoundInstance<T> {
    fn dimension(&self) -> usize {
        1
    }

    fn value(&self, x: &[T]) -> T {
        T::of(0.5) * (x[0] - self.b) * (x[0] - self.b)
    }

    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        out[0] = x[0] - self.b;
    }

    fn noisy_gradient_into<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R, out: &mut [T]) {
        // Callers keep iterates in the domain via projection.
        let event = rng.random::<f64>() < self.p.as_f64();
        out[0] = self.oracle_with(x[0], event);
    }

    fn constants(&self) -> &Constants<T> {
        &self.constants
    }

    fn domain(&self) -> Option<&Domain<T>> {
        Some(&self.domain)
    }

    fn optimum(&self) -> Option<(&[T], T)> {
        Some((&self.x_star, T::zero()))
    }

    fn id(&self) -> String {
        format!("lowerbound(eps={},alpha={},nu={})", self.epsilon, self.alpha, self.nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;

    #[test]
    fn eighth_alpha_two_nu_zero() {
        let inst = LowerBoundInstance::new(0.125f64, 2.0, 0).unwrap();
        assert_eq!(inst.gamma(), 0.5);
        assert_eq!(inst.p(), 0.25);
        assert_eq!(inst.b(), 0.25);
        // E[g(x)] = x − p/(2γ)
        let x = 0.3;
        let mean = inst.p() * inst.oracle_with(x, true) + (1.0 - inst.p()) * inst.oracle_with(x, false);
        assert!((mean - inst.gradient(x)).abs() < 1e-15);
    }

    #[test]
    fn eighth_alpha_two_nu_one() {
        let inst = LowerBoundInstance::new(0.125f64, 2.0, 1).unwrap();
        assert_eq!(inst.p(), 0.125);
        assert_eq!(inst.b(), 0.125);
        let x = 0.1;
        let mean = inst.p() * inst.oracle_with(x, true) + (1.0 - inst.p()) * inst.oracle_with(x, false);
        assert!((mean - (x - 0.125)).abs() < 1e-15);
    }

    #[test]
    fn derived_quantities_in_range() {
        for &eps in &[0.125, 0.0625, 0.01] {
            for &alpha in &[1.1, 1.5, 2.0] {
                for nu in 0..2 {
                    let inst = LowerBoundInstance::new(eps, alpha, nu).unwrap();
                    assert!(inst.gamma() > 0.0 && inst.gamma() <= 0.5);
                    assert!(inst.p() > 0.0 && inst.p() < 1.0);
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        let inst = LowerBoundInstance::new(0.125f64, 1.5, 0).unwrap();
        let mut rng = Seed::new(0).rng();
        assert!(matches!(lowerbound_oracle(&inst, 0.6, &mut rng), Err(Error::Domain(_))));
        assert!(lowerbound_oracle(&inst, -0.01, &mut rng).is_err());
        assert!(lowerbound_oracle(&inst, 0.5, &mut rng).is_ok());
        assert!(LowerBoundInstance::new(0.2f64, 1.5, 0).is_err());
        assert!(LowerBoundInstance::new(0.1f64, 1.0, 0).is_err());
        assert!(LowerBoundInstance::new(0.1f64, 1.5, 2).is_err());
    }
}
