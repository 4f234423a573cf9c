//! Rate fitting, bound checks and the RMSProp/ACClip step-size comparison.

mod aggregate;
mod envelope;
mod sandwich;
mod slope;
mod stats;

pub use aggregate::{seed_mean, seed_median, Metric, SeedCurve};
pub use envelope::{bound_envelope_check, EnvelopeResult, RateBound};
pub use sandwich::{sandwich_check, sandwich_fuzz, RmsPropParams, SandwichFuzz, SandwichResult};
pub use slope::{fit_loglog_slope, SlopeFit};
pub use stats::{ks_two_sample, median, sign_test_p_value, KsResult};
