use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian,
    #[serde(alias = "pareto")]
    SymmetricPareto,
    #[serde(alias = "stable")]
    SymmetricAlphaStable,
    Zero,
}

impl std::str::FromStr for NoiseFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gaussian" => Ok(NoiseFamily::Gaussian),
            "pareto" | "symmetric_pareto" => Ok(NoiseFamily::SymmetricPareto),
            "stable" | "symmetric_alpha_stable" => Ok(NoiseFamily::SymmetricAlphaStable),
            "zero" => Ok(NoiseFamily::Zero),
            other => Err(format!("unknown noise family `{other}` (gaussian, pareto, stable, zero)")),
        }
    }
}

impl NoiseFamily {
    pub fn name(self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::SymmetricPareto => "symmetric_pareto",
            NoiseFamily::SymmetricAlphaStable => "symmetric_alpha_stable",
            NoiseFamily::Zero => "zero",
        }
    }
}

/// Gap between a target moment exponent and the tail index that realizes it.
pub const MOMENT_MARGIN: f64 = 0.05;

/// Declarative description of an additive gradient-noise distribution.
///
/// Coordinates are independent. `tail_index` is the distribution's own
/// parameter `a` (Pareto tail exponent or stable index), which is unused for
/// the Gaussian and zero families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    #[serde(default = "default_tail_index")]
    pub tail_index: f64,
    #[serde(default = "one")]
    pub scale: f64,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_coordinate_scales: Option<Vec<f64>>,
}

fn default_tail_index() -> f64 {
    2.0
}

fn one() -> f64 {
    1.0
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, tail_index: f64, scale: f64, dimension: usize) -> Self {
        NoiseSpec {
            family,
            tail_index,
            scale,
            dimension,
            per_coordinate_scales: None,
        }
    }

    pub fn zero(dimension: usize) -> Self {
        Self::new(NoiseFamily::Zero, 2.0, 1.0, dimension)
    }

    pub fn gaussian(scale: f64, dimension: usize) -> Self {
        Self::new(NoiseFamily::Gaussian, 2.0, scale, dimension)
    }

    pub fn stable(a: f64, scale: f64, dimension: usize) -> Self {
        Self::new(NoiseFamily::SymmetricAlphaStable, a, scale, dimension)
    }

    pub fn pareto(a: f64, scale: f64, dimension: usize) -> Self {
        Self::new(NoiseFamily::SymmetricPareto, a, scale, dimension)
    }

    /// Heavy-tailed noise whose moments of order `alpha` exist while the
    /// variance does not: the tail index sits [`MOMENT_MARGIN`] above `alpha`.
    pub fn for_moment(family: NoiseFamily, alpha: f64, scale: f64, dimension: usize) -> Self {
        Self::new(family, alpha + MOMENT_MARGIN, scale, dimension)
    }

    pub fn with_per_coordinate_scales(mut self, scales: Vec<f64>) -> Self {
        self.per_coordinate_scales = Some(scales);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return config("noise dimension must be positive");
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return config(format!("noise scale must be positive, got {}", self.scale));
        }
        match self.family {
            NoiseFamily::SymmetricAlphaStable if !(self.tail_index > 1.0 && self.tail_index <= 2.0) => {
                return config(format!(
                    "stable index must lie in (1, 2], got {}",
                    self.tail_index
                ));
            }
            NoiseFamily::SymmetricPareto if !(self.tail_index > 1.0 && self.tail_index.is_finite()) => {
                return config(format!(
                    "Pareto tail index must exceed 1, got {}",
                    self.tail_index
                ));
            }
            _ => {}
        }
        if let Some(s) = &self.per_coordinate_scales {
            if s.len() != self.dimension {
                return config(format!(
                    "per_coordinate_scales has length {}, dimension is {}",
                    s.len(),
                    self.dimension
                ));
            }
            if s.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return config("per_coordinate_scales must be positive");
            }
        }
        Ok(())
    }

    #[inline]
    fn coord_scale(&self, i: usize) -> f64 {
        match &self.per_coordinate_scales {
            Some(s) => s[i],
            None => self.scale,
        }
    }

    /// One scalar draw of unit scale from the family.
    #[inline]
    pub fn unit_draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            NoiseFamily::Zero => 0.0,
            NoiseFamily::Gaussian => StandardNormal.sample(rng),
            NoiseFamily::SymmetricPareto => {
                let u: f64 = rng.random();
                let m = pareto_magnitude(u, self.tail_index);
                if rng.random::<bool>() {
                    m
                } else {
                    -m
                }
            }
            NoiseFamily::SymmetricAlphaStable => {
                // V ~ U(-π/2, π/2), open at both ends.
                let v = loop {
                    let v = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
                    if v.abs() < FRAC_PI_2 {
                        break v;
                    }
                };
                let w: f64 = Exp1.sample(rng);
                cms_symmetric(self.tail_index, v, w)
            }
        }
    }

    /// Fill `out` with one noise vector.
    ///
    /// Assumes a validated spec; `out.len()` must equal the dimension.
    #[inline]
    pub fn sample_into<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        debug_assert_eq!(out.len(), self.dimension);
        if self.family == NoiseFamily::Zero {
            out.iter_mut().for_each(|o| *o = T::zero());
            return;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = T::of(self.coord_scale(i) * self.unit_draw(rng));
        }
    }

    /// Draw one noise vector of length `dimension`.
    pub fn sample<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<T>> {
        self.validate()?;
        let mut out = vec![T::zero(); self.dimension];
        self.sample_into(rng, &mut out);
        Ok(out)
    }
}

/// Inverse-CDF magnitude of a unit-scale Pareto(a) variate: `(1-u)^(-1/a)`.
#[inline]
pub fn pareto_magnitude(u: f64, a: f64) -> f64 {
    (1.0 - u).powf(-1.0 / a)
}

/// Chambers–Mallows–Stuck transform for a symmetric stable law of index `a`
/// and unit scale, from `v ~ U(-π/2, π/2)` and `w ~ Exp(1)`.
#[inline]
pub fn cms_symmetric(a: f64, v: f64, w: f64) -> f64 {
    if a == 1.0 {
        return v.tan();
    }
    let av = a * v;
    av.sin() / v.cos().powf(1.0 / a) * ((v - av).cos() / w).powf((1.0 - a) / a)
}
