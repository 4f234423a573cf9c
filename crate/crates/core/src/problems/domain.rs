use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::scalar::{distance, Scalar};

/// Closed convex feasible set with a cheap Euclidean projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain<T> {
    Ball { center: Vec<T>, radius: T },
    Box { lower: Vec<T>, upper: Vec<T> },
    Interval { lo: T, hi: T },
}

impl<T: Scalar> Domain<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Ball { radius, .. } if !(*radius > T::zero()) => {
                config("ball radius must be positive")
            }
            Domain::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return config("box bounds differ in length");
                }
                if lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
                    return config("box requires lower < upper elementwise");
                }
                Ok(())
            }
            Domain::Interval { lo, hi } if !(lo < hi) => config("interval requires lo < hi"),
            _ => Ok(()),
        }
    }

    /// Dimension of the set, `None` for an interval (applied coordinate-wise).
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Domain::Ball { center, .. } => Some(center.len()),
            Domain::Box { lower, .. } => Some(lower.len()),
            Domain::Interval { .. } => None,
        }
    }

    pub fn contains(&self, x: &[T], tol: T) -> bool {
        match self {
            Domain::Ball { center, radius } => distance(x, center) <= *radius + tol,
            Domain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&v, (&l, &u))| v >= l - tol && v <= u + tol),
            Domain::Interval { lo, hi } => x.iter().all(|&v| v >= *lo - tol && v <= *hi + tol),
        }
    }

    /// Project `y` onto the set in place.
    pub fn project_in_place(&self, y: &mut [T]) {
        match self {
            Domain::Ball { center, radius } => {
                let dist = distance(y, center);
                if dist > *radius {
                    let s = *radius / dist;
                    for (v, &c) in y.iter_mut().zip(center) {
                        *v = c + (*v - c) * s;
                    }
                }
            }
            Domain::Box { lower, upper } => {
                for (v, (&l, &u)) in y.iter_mut().zip(lower.iter().zip(upper)) {
                    *v = v.max(l).min(u);
                }
            }
            Domain::Interval { lo, hi } => {
                for v in y.iter_mut() {
                    *v = v.max(*lo).min(*hi);
                }
            }
        }
    }
}

/// Euclidean projection of `y` onto `domain`.
pub fn project<T: Scalar>(domain: &Domain<T>, y: &[T]) -> Vec<T> {
    let mut out = y.to_vec();
    domain.project_in_place(&mut out);
    out
}
