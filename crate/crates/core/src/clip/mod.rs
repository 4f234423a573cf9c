//! Clipping operators, the ACClip state machine, and bias–variance probes.

mod acclip;
mod ops;
mod probe;

pub use acclip::{acclip_step, ACClipParams, ACClipState};
pub use ops::{cclip, cclip_in_place, gclip, gclip_factor, gclip_in_place, ClipThreshold};
pub use probe::{bias_variance_grid, bias_variance_probe, ClipBounds, ProbeResult};
