//! Optimization loops, step-size/threshold schedules and iterate averaging.

mod average;
mod config;
mod run;
mod schedule;
mod trace;

pub use average::{weighted_average, WeightedAverage};
pub use config::{Algorithm, EvalPoint, OptimizerConfig, RecordStride, ScheduleSpec, Theorem1Preset};
pub use run::run;
pub use schedule::{cclip_thresholds, theorem1_schedule, theorem2_schedule, Schedule, StepRule, ThresholdRule};
pub use trace::{Trace, TraceRecord};
