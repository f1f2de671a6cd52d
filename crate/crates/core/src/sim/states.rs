//! Time spent in each processor state relative to one task, measured on a trace.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::TaskSet;
use crate::time::Tick;

use super::trace::{JobId, ProcessorState, ScheduleTrace};

/// Amounts of time within `[c, d)` seen from task `τ_k` and a reference job
/// `τ_{k,ℓ}`. The current job of `τ_k` is its earliest-released active job.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BQuantities {
    /// No active job of `τ_k`.
    pub b_tilde: Tick,
    /// `τ_k` active, and no job of higher priority than its current job executing.
    pub b_k: Tick,
    /// Per task `i`: executing `τ_i` above the current job of `τ_k`. Entry `k` is 0.
    pub b_i_k: Vec<Tick>,
    /// Per job `j` of `τ_k`: `τ_{k,j}` executing or suspended, and no job of
    /// higher priority than `τ_{k,j}` executing.
    pub b_k_j: BTreeMap<usize, Tick>,
    /// Per task `i`: executing `τ_i` above `τ_{k,ℓ}`. Entry `k` is 0.
    pub b_i_kl: Vec<Tick>,
}

/// Measures [`BQuantities`] for task `k` and reference job `ell` over `[c, d)`.
/// An empty or reversed interval measures all zeros.
pub fn trace_b_quantities(
    trace: &ScheduleTrace,
    ts: &TaskSet,
    k: usize,
    c: Tick,
    d: Tick,
    ell: usize,
) -> Result<BQuantities> {
    if k >= ts.len() {
        return Err(Error::TaskIndex(k));
    }
    let reference = trace
        .job(JobId { task: k, job: ell })
        .ok_or_else(|| Error::JobSequence(format!("no job {ell} of task {k} in the trace")))?;
    let own = trace.jobs_of(k);
    let mut q = BQuantities {
        b_i_k: vec![0; ts.len()],
        b_i_kl: vec![0; ts.len()],
        b_k_j: own.iter().map(|j| (j.id.job, 0)).collect(),
        ..Default::default()
    };
    if c >= d {
        return Ok(q);
    }
    if d > trace.horizon {
        return Err(Error::OffsetRange { offset: d, limit: trace.horizon });
    }

    // Jobs of one task finish in release order, so the active jobs at any
    // instant form a contiguous run of `own`, and only its first (the
    // current job) can execute or suspend. Suspensions of one task are
    // disjoint and sorted by start.
    let own_susp: Vec<_> = trace.suspensions.iter().filter(|s| s.job.task == k).collect();
    let lo = trace.intervals.partition_point(|iv| iv.end <= c);
    let hi = trace.intervals.partition_point(|iv| iv.start < d);
    let mut cuts = vec![c, d];
    cuts.extend(trace.intervals[lo..hi].iter().flat_map(|iv| [iv.start, iv.end]));
    cuts.extend(own.iter().flat_map(|j| [j.release].into_iter().chain(j.finish)));
    cuts.extend(own_susp.iter().flat_map(|s| [s.start, s.end]));
    cuts.retain(|&t| c <= t && t <= d);
    cuts.sort_unstable();
    cuts.dedup();

    for w in cuts.windows(2) {
        let (u, len) = (w[0], w[1] - w[0]);
        let running = match trace.state_at(u) {
            Some(ProcessorState::Executing(id)) => trace.job(id),
            _ => None,
        };
        let above = |key| running.is_some_and(|r| r.priority < key);

        if let Some(r) = running.filter(|r| r.id.task != k && r.priority < reference.priority) {
            q.b_i_kl[r.id.task] += len;
        }
        let first_active = own.partition_point(|j| j.finish.is_some_and(|f| f <= u));
        let current = own.get(first_active).filter(|j| j.release <= u);
        let Some(cur) = current else {
            q.b_tilde += len;
            continue;
        };
        if above(cur.priority) {
            q.b_i_k[running.expect("running job").id.task] += len;
        } else {
            q.b_k += len;
        }
        let s = own_susp.partition_point(|s| s.start <= u);
        let suspended = s > 0 && own_susp[s - 1].end > u && own_susp[s - 1].job == cur.id;
        let busy = running.is_some_and(|r| r.id == cur.id) || suspended;
        if busy && !above(cur.priority) {
            *q.b_k_j.get_mut(&cur.id.job).expect("initialised") += len;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{derive_priority_points, PriorityAssignment, PriorityPolicy};
    use crate::sim::{
        generate_job_sequence, simulate_el, DemandModel, JobBehavior, JobSequence, Phase, ReleaseModel, SuspensionModel,
    };
    use proptest::prelude::*;

    fn fig1() -> (TaskSet, ScheduleTrace) {
        let ts = TaskSet::from_tuples(&[(2, 0, 5, 5), (7, 3, 16, 16)]).unwrap();
        let mut jobs: Vec<JobBehavior> = (0..3)
            .map(|j| JobBehavior {
                task: 0,
                job: j,
                release: 5 * j as Tick,
                demand: 2,
                phases: vec![Phase { execute: 2, suspend: 0 }],
            })
            .collect();
        jobs.push(JobBehavior {
            task: 1,
            job: 0,
            release: 0,
            demand: 7,
            phases: vec![Phase { execute: 1, suspend: 3 }, Phase { execute: 6, suspend: 0 }],
        });
        let seq = JobSequence::new(jobs, 15, &ts).unwrap();
        let trace = simulate_el(&ts, &PriorityAssignment::new(vec![4, 10]), &seq).unwrap();
        (ts, trace)
    }

    /// Tick-by-tick classification, written from the state definitions
    /// without the segment machinery.
    fn per_tick(trace: &ScheduleTrace, n: usize, k: usize, c: Tick, d: Tick, ell: usize) -> BQuantities {
        let reference = trace.job(JobId { task: k, job: ell }).unwrap().priority;
        let mut q = BQuantities {
            b_i_k: vec![0; n],
            b_i_kl: vec![0; n],
            b_k_j: trace.jobs_of(k).iter().map(|j| (j.id.job, 0)).collect(),
            ..Default::default()
        };
        for t in c..d {
            let running = match trace.state_at(t).unwrap() {
                ProcessorState::Executing(id) => Some(*trace.job(id).unwrap()),
                _ => None,
            };
            let active: Vec<_> =
                trace.jobs_of(k).iter().filter(|j| j.release <= t && j.finish.is_none_or(|f| t < f)).collect();
            if let Some(r) = running {
                if r.id.task != k && r.priority < reference {
                    q.b_i_kl[r.id.task] += 1;
                }
            }
            let Some(cur) = active.iter().min_by_key(|j| j.release) else {
                q.b_tilde += 1;
                continue;
            };
            match running {
                Some(r) if r.priority < cur.priority => q.b_i_k[r.id.task] += 1,
                _ => q.b_k += 1,
            }
            for j in trace.jobs_of(k) {
                let on = running.is_some_and(|r| r.id == j.id) || trace.is_suspended_at(j.id, t);
                if on && !running.is_some_and(|r| r.priority < j.priority) {
                    *q.b_k_j.get_mut(&j.id.job).unwrap() += 1;
                }
            }
        }
        q
    }

    #[test]
    fn fig1_quantities_for_the_suspending_task() {
        let (ts, trace) = fig1();
        let q = trace_b_quantities(&trace, &ts, 1, 0, 15, 0).unwrap();
        // τ2 is active on [0,13): τ1 runs above it on [0,2) and [5,7); it
        // executes or suspends on [2,5) and [7,13).
        assert_eq!(q.b_tilde, 2);
        assert_eq!(q.b_k, 9);
        assert_eq!(q.b_i_k, vec![4, 0]);
        assert_eq!(q.b_k_j, BTreeMap::from([(0, 9)]));
        assert_eq!(q.b_i_kl, vec![4, 0]);
        assert_eq!(q, per_tick(&trace, 2, 1, 0, 15, 0));
    }

    #[test]
    fn degenerate_intervals() {
        let (ts, trace) = fig1();
        for c in 0..15 {
            let q = trace_b_quantities(&trace, &ts, 0, c, c, 1).unwrap();
            assert_eq!((q.b_tilde, q.b_k, q.b_i_k.iter().sum::<Tick>()), (0, 0, 0));
        }
        assert_eq!(trace_b_quantities(&trace, &ts, 0, 9, 3, 1).unwrap().b_tilde, 0);
        // τ1 has no active job on [2,5).
        let q = trace_b_quantities(&trace, &ts, 0, 2, 5, 0).unwrap();
        assert_eq!((q.b_tilde, q.b_k), (3, 0));
        assert!(trace_b_quantities(&trace, &ts, 0, 0, 16, 0).is_err());
        assert!(trace_b_quantities(&trace, &ts, 2, 0, 5, 0).is_err());
        assert!(trace_b_quantities(&trace, &ts, 0, 0, 5, 7).is_err());
    }

    fn random_trace() -> impl Strategy<Value = (TaskSet, ScheduleTrace)> {
        (prop::collection::vec((2u64..25, 0u64..8, 0u64..6, 0u64..20), 1..5), any::<u64>(), any::<bool>(), 0usize..3)
            .prop_map(|(raw, seed, jittered, susp)| {
                let tasks: Vec<_> = raw.iter().map(|&(t, c, s, extra)| (c.min(t), s, t + extra % 5, t)).collect();
                let ts = TaskSet::from_tuples(&tasks).unwrap();
                let pa = derive_priority_points(&ts, &PriorityPolicy::Edf).unwrap();
                let rel = if jittered { ReleaseModel::SporadicJittered } else { ReleaseModel::Periodic };
                let sm = [SuspensionModel::None, SuspensionModel::MaxSingleBlock, SuspensionModel::RandomPhases][susp];
                let seq = generate_job_sequence(&ts, 80, seed, rel, sm, DemandModel::Random).unwrap();
                let trace = simulate_el(&ts, &pa, &seq).unwrap();
                (ts, trace)
            })
    }

    proptest! {
        #[test]
        fn partition_and_refinement_identities((ts, trace) in random_trace(), k in 0usize..5, c in 0u64..80, len in 0u64..80) {
            let k = k % ts.len();
            let d = (c + len).min(trace.horizon);
            let Some(first) = trace.jobs_of(k).first() else { return Ok(()); };
            let q = trace_b_quantities(&trace, &ts, k, c, d, first.id.job).unwrap();
            let total = q.b_tilde + q.b_k + q.b_i_k.iter().sum::<Tick>();
            prop_assert_eq!(total, d.saturating_sub(c));
            prop_assert_eq!(q.b_k, q.b_k_j.values().sum::<Tick>());
            prop_assert_eq!(&q, &per_tick(&trace, ts.len(), k, c, d, first.id.job));
        }

        #[test]
        fn backbone_bound_holds((ts, trace) in random_trace(), pick in any::<prop::sample::Index>(), back in 0u64..40) {
            let finished: Vec<_> = trace.jobs.iter().filter(|j| j.finish.is_some() && j.deadline <= trace.horizon).collect();
            if finished.is_empty() {
                return Ok(());
            }
            let job = finished[pick.index(finished.len())];
            let k = job.id.task;
            // Admissible window starts: after the release, or earlier while τ_k
            // stays active up to the release.
            let mut c = job.release;
            if back >= 30 {
                c = (c + (back - 30) * ts[k].deadline / 10).min(job.deadline);
            }
            while back < 30 && c > 0 && job.release - c < back && trace.jobs_of(k).iter().any(|j| j.is_active_at(c - 1)) {
                c -= 1;
            }
            let q = trace_b_quantities(&trace, &ts, k, c, job.deadline, job.id.job).unwrap();
            let own: Tick = q.b_k_j.range(..job.id.job).map(|(_, v)| v).sum();
            let bound = (ts[k].wcet + ts[k].max_suspension + q.b_i_kl.iter().sum::<Tick>() + own + c) as i64 - job.release as i64;
            if bound <= ts[k].deadline as i64 {
                prop_assert!(job.response_time().unwrap() as i64 <= bound);
            }
        }
    }
}
