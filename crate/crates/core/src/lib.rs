//! Schedulability analysis for self-suspending sporadic tasks under
//! EDF-like (EL) scheduling on one processor.
//!
//! * [`model`] and [`policy`]: tasks, task sets, relative priority points.
//! * [`analysis`]: the fixed- and variable-window response-time tests.
//! * [`sim`]: an event-driven EL/fixed-priority simulator used as an oracle.
//! * [`generator`]: random task sets (UUniFast, log-uniform periods).
//! * [`experiments`]: acceptance-ratio sweeps, benchmarks, fuzz campaigns.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod generator;
pub mod model;
pub mod policy;
pub mod sim;
pub mod time;

pub use error::{Error, Result};
pub use model::{utilization, Task, TaskSet};
pub use policy::{derive_priority_points, job_priority_point, PriorityAssignment, PriorityPolicy};
pub use time::{SignedTick, Tick};

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/generator.md")]
    mod generator {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
