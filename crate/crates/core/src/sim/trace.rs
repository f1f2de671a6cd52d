//! Schedule traces and what can be read off them.

use std::fmt::{self, Write as _};

use crate::model::TaskSet;
use crate::time::{SignedTick, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JobId {
    pub task: usize,
    pub job: usize,
}

/// Total order used by the dispatcher; the smaller key runs.
///
/// EL scheduling uses `(r + Π_task, task, job)`; task-level fixed priority
/// uses `(0, task, job)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PriorityKey {
    pub point: SignedTick,
    pub task: usize,
    pub job: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessorState {
    Executing(JobId),
    /// Not executing, and at least one job is suspended.
    Suspended,
    /// Neither executing nor suspended.
    Waiting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub start: Tick,
    pub end: Tick,
    pub state: ProcessorState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SuspensionInterval {
    pub job: JobId,
    pub start: Tick,
    pub end: Tick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JobRecord {
    pub id: JobId,
    pub release: Tick,
    pub deadline: Tick,
    pub priority: PriorityKey,
    /// First tick of execution; `None` if the job never executed.
    pub start: Option<Tick>,
    /// `None` if the job had not finished by the horizon.
    pub finish: Option<Tick>,
}

impl JobRecord {
    pub fn response_time(&self) -> Option<Tick> {
        self.finish.map(|f| f - self.release)
    }

    /// Released and not finished at `t`.
    pub fn is_active_at(&self, t: Tick) -> bool {
        self.release <= t && self.finish.is_none_or(|f| f > t)
    }
}

/// The schedule on `[0, horizon)`.
///
/// Intervals are contiguous and cover `[0, horizon)`; adjacent intervals
/// differ in state. Job records are sorted by task, then job index.
/// Suspensions are clipped to the horizon and sorted by start.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScheduleTrace {
    pub horizon: Tick,
    pub intervals: Vec<Interval>,
    pub jobs: Vec<JobRecord>,
    pub suspensions: Vec<SuspensionInterval>,
}

pub const TRACE_HEADER: &str = "# el-sched trace v1";

impl ScheduleTrace {
    pub fn job(&self, id: JobId) -> Option<&JobRecord> {
        self.jobs.binary_search_by_key(&id, |j| j.id).ok().map(|i| &self.jobs[i])
    }

    pub fn jobs_of(&self, task: usize) -> &[JobRecord] {
        let lo = self.jobs.partition_point(|j| j.id.task < task);
        let hi = self.jobs.partition_point(|j| j.id.task <= task);
        &self.jobs[lo..hi]
    }

    /// Processor state during `[t, t+1)`; `None` outside `[0, horizon)`.
    pub fn state_at(&self, t: Tick) -> Option<ProcessorState> {
        let i = self.intervals.partition_point(|iv| iv.end <= t);
        self.intervals.get(i).filter(|iv| iv.start <= t).map(|iv| iv.state)
    }

    pub fn is_suspended_at(&self, id: JobId, t: Tick) -> bool {
        self.suspensions.iter().any(|s| s.job == id && s.start <= t && t < s.end)
    }

    /// Execution intervals of one job, merged where adjacent.
    pub fn executions_of(&self, id: JobId) -> Vec<(Tick, Tick)> {
        let mut out: Vec<(Tick, Tick)> = Vec::new();
        for iv in &self.intervals {
            if iv.state == ProcessorState::Executing(id) {
                match out.last_mut() {
                    Some(last) if last.1 == iv.start => last.1 = iv.end,
                    _ => out.push((iv.start, iv.end)),
                }
            }
        }
        out
    }

    /// Execution intervals of every job of a task, merged where adjacent.
    pub fn task_executions(&self, task: usize) -> Vec<(Tick, Tick)> {
        let mut out: Vec<(Tick, Tick)> = Vec::new();
        for iv in &self.intervals {
            if matches!(iv.state, ProcessorState::Executing(id) if id.task == task) {
                match out.last_mut() {
                    Some(last) if last.1 == iv.start => last.1 = iv.end,
                    _ => out.push((iv.start, iv.end)),
                }
            }
        }
        out
    }

    /// Line-oriented text form; job indices are 0-based and `-` marks a
    /// missing value. Priority keys are not exported, so traces of different
    /// policies that schedule identically export identically.
    pub fn export(&self) -> String {
        let opt = |v: Option<Tick>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        let mut out = String::new();
        writeln!(out, "{TRACE_HEADER}").unwrap();
        writeln!(out, "# horizon {}", self.horizon).unwrap();
        for j in &self.jobs {
            writeln!(out, "# job {} {} {} {} {}", j.id.task, j.id.job, j.release, opt(j.start), opt(j.finish)).unwrap();
        }
        for s in &self.suspensions {
            writeln!(out, "# susp {} {} {} {}", s.start, s.end, s.job.task, s.job.job).unwrap();
        }
        for iv in &self.intervals {
            match iv.state {
                ProcessorState::Executing(id) => writeln!(out, "{} {} exec {} {}", iv.start, iv.end, id.task, id.job),
                ProcessorState::Suspended => writeln!(out, "{} {} susp - -", iv.start, iv.end),
                ProcessorState::Waiting => writeln!(out, "{} {} wait - -", iv.start, iv.end),
            }
            .unwrap();
        }
        out
    }

    /// Every eligible job that is neither suspended nor finished must be
    /// running unless a job is executing.
    pub fn is_work_conserving(&self) -> bool {
        self.intervals.iter().all(|iv| {
            if matches!(iv.state, ProcessorState::Executing(_)) {
                return true;
            }
            // Eligibility and readiness only change at recorded event times,
            // so checking the first tick of each sub-segment suffices.
            let mut cuts: Vec<Tick> = vec![iv.start];
            for j in &self.jobs {
                cuts.extend([j.release].into_iter().chain(j.finish));
            }
            for s in &self.suspensions {
                cuts.extend([s.start, s.end]);
            }
            cuts.retain(|&t| iv.start <= t && t < iv.end);
            cuts.sort_unstable();
            cuts.dedup();
            cuts.into_iter().all(|t| {
                let mut any_suspended = false;
                for task_jobs in self.jobs.chunk_by(|a, b| a.id.task == b.id.task) {
                    if let Some(cur) = task_jobs.iter().find(|j| j.is_active_at(t)) {
                        if !self.is_suspended_at(cur.id, t) {
                            return false;
                        }
                        any_suspended = true;
                    }
                }
                any_suspended == (iv.state == ProcessorState::Suspended)
            })
        })
    }
}

impl fmt::Display for ScheduleTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.export())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResponseTimes {
    /// `f − r` for every job that finished.
    pub per_job: Vec<(JobId, Tick)>,
    /// Maximum over finished jobs; `None` for tasks without one.
    pub per_task_max: Vec<Option<Tick>>,
    pub unfinished: Vec<JobId>,
}

/// Exact response times; `n_tasks` sizes the per-task maxima.
pub fn response_times(trace: &ScheduleTrace, n_tasks: usize) -> ResponseTimes {
    let mut out = ResponseTimes { per_task_max: vec![None; n_tasks], ..Default::default() };
    for j in &trace.jobs {
        match j.response_time() {
            Some(r) => {
                out.per_job.push((j.id, r));
                if let Some(slot) = out.per_task_max.get_mut(j.id.task) {
                    *slot = Some(slot.map_or(r, |m: Tick| m.max(r)));
                }
            }
            None => out.unfinished.push(j.id),
        }
    }
    out
}

/// No job finishes after `r + D`, and no job whose deadline lies within the
/// horizon is left unfinished. Jobs with later deadlines are not judged.
pub fn check_feasibility(trace: &ScheduleTrace, ts: &TaskSet) -> bool {
    trace.jobs.iter().all(|j| {
        let deadline = j.release + ts[j.id.task].deadline;
        match j.finish {
            Some(f) => f <= deadline,
            None => deadline > trace.horizon,
        }
    })
}
