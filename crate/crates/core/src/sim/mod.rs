//! Event-driven uniprocessor simulation of EL and task-level fixed-priority
//! scheduling with dynamic self-suspension.
//!
//! A [`JobSequence`] fixes every job's release, demand and suspension plan;
//! [`simulate_el`] and [`simulate_tfp`] turn it into a [`ScheduleTrace`].

mod engine;
mod jobs;
mod states;
mod trace;

pub use engine::{simulate_el, simulate_tfp};
pub use jobs::{generate_job_sequence, DemandModel, JobBehavior, JobSequence, Phase, ReleaseModel, SuspensionModel};
pub use states::{trace_b_quantities, BQuantities};
pub use trace::{
    check_feasibility, response_times, Interval, JobId, JobRecord, PriorityKey, ProcessorState, ResponseTimes,
    ScheduleTrace, SuspensionInterval, TRACE_HEADER,
};
