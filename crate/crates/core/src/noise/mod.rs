//! Gradient-noise samplers and empirical moment / tail diagnostics.

mod moments;
mod sampler;
mod tail;

pub use moments::{empirical_moment, variance_growth_curve, MomentEstimate, MomentAccumulator};
pub use sampler::{cms_symmetric, pareto_magnitude, NoiseFamily, NoiseSpec, MOMENT_MARGIN};
pub use tail::{tail_index, TailIndexEstimate, DEFAULT_BLOCK_SIZE};
