//! Concrete job behaviours: releases, execution demands and suspension plans.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::model::TaskSet;
use crate::time::Tick;

/// Execute for `execute` ticks, then suspend for `suspend` ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase {
    pub execute: Tick,
    pub suspend: Tick,
}

/// What one job does once it becomes eligible.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JobBehavior {
    pub task: usize,
    /// Index of the job within its task, from 0.
    pub job: usize,
    pub release: Tick,
    /// Total execution, equal to the sum of the phases' `execute` parts.
    pub demand: Tick,
    pub phases: Vec<Phase>,
}

impl JobBehavior {
    pub fn total_suspension(&self) -> Tick {
        self.phases.iter().map(|p| p.suspend).sum()
    }
}

/// Every job released before `horizon`, sorted by task, then job index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JobSequence {
    pub behaviors: Vec<JobBehavior>,
    pub horizon: Tick,
}

impl JobSequence {
    /// Sorts the behaviours and checks them against `ts`: demands and
    /// suspensions within budget, consecutive job indices, sporadic
    /// separation, and releases before the horizon.
    pub fn new(mut behaviors: Vec<JobBehavior>, horizon: Tick, ts: &TaskSet) -> Result<Self> {
        behaviors.sort_by_key(|b| (b.task, b.job));
        let seq = JobSequence { behaviors, horizon };
        seq.validate(ts)?;
        Ok(seq)
    }

    pub fn validate(&self, ts: &TaskSet) -> Result<()> {
        let bad = |msg: String| Err(Error::JobSequence(msg));
        let mut prev: Option<&JobBehavior> = None;
        for b in &self.behaviors {
            let Some(task) = ts.tasks().get(b.task) else {
                return bad(format!("job of unknown task {}", b.task));
            };
            let executed: Tick = b.phases.iter().map(|p| p.execute).sum();
            if executed != b.demand {
                return bad(format!("job ({}, {}): phases execute {executed}, demand is {}", b.task, b.job, b.demand));
            }
            if b.demand > task.wcet {
                return bad(format!("job ({}, {}): demand {} exceeds WCET {}", b.task, b.job, b.demand, task.wcet));
            }
            if b.total_suspension() > task.max_suspension {
                return bad(format!("job ({}, {}): suspends longer than {}", b.task, b.job, task.max_suspension));
            }
            if b.release >= self.horizon {
                return bad(format!("job ({}, {}): released at or after the horizon", b.task, b.job));
            }
            match prev {
                Some(p) if p.task == b.task => {
                    if b.job != p.job + 1 {
                        return bad(format!("task {}: job indices not consecutive at {}", b.task, b.job));
                    }
                    if b.release < p.release + task.min_interarrival {
                        return bad(format!("task {}: jobs {} and {} closer than T", b.task, p.job, b.job));
                    }
                }
                _ if b.job != 0 => return bad(format!("task {}: first job has index {}", b.task, b.job)),
                _ => {}
            }
            prev = Some(b);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.behaviors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.behaviors.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReleaseModel {
    /// `r_j = j·T`.
    Periodic,
    /// Gaps of `T` plus random slack: none half of the time, otherwise
    /// exponentially distributed with mean `T/2`.
    SporadicJittered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SuspensionModel {
    None,
    /// One suspension of `S` right after the first tick of execution.
    MaxSingleBlock,
    /// Zero to three suspensions totalling a uniform draw from `[0, S]`,
    /// placed at random points of the execution.
    RandomPhases,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DemandModel {
    Wcet,
    /// Uniform in `[0, C]`.
    Random,
}

/// Splits `total` into `parts` non-negative pieces at uniformly drawn cut points.
fn random_split(rng: &mut impl Rng, total: Tick, parts: usize) -> Vec<Tick> {
    let mut cuts: Vec<Tick> = (0..parts.saturating_sub(1)).map(|_| rng.random_range(0..=total)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut last = 0;
    for c in cuts {
        out.push(c - last);
        last = c;
    }
    out.push(total - last);
    out
}

fn phases_for(rng: &mut impl Rng, demand: Tick, max_susp: Tick, model: SuspensionModel) -> Vec<Phase> {
    match model {
        SuspensionModel::None => vec![Phase { execute: demand, suspend: 0 }],
        SuspensionModel::MaxSingleBlock => {
            let first = demand.min(1);
            let mut phases = vec![Phase { execute: first, suspend: max_susp }];
            if demand > first {
                phases.push(Phase { execute: demand - first, suspend: 0 });
            }
            phases
        }
        SuspensionModel::RandomPhases => {
            let blocks = rng.random_range(0..=3usize);
            let total = if blocks == 0 { 0 } else { rng.random_range(0..=max_susp) };
            let susp = random_split(rng, total, blocks);
            let exec = random_split(rng, demand, blocks + 1);
            exec.iter()
                .enumerate()
                .map(|(i, &e)| Phase { execute: e, suspend: susp.get(i).copied().unwrap_or(0) })
                .collect()
        }
    }
}

/// Draws a job sequence for `ts` up to `horizon`. Equal seeds give equal
/// sequences.
pub fn generate_job_sequence(
    ts: &TaskSet,
    horizon: Tick,
    seed: u64,
    releases: ReleaseModel,
    suspensions: SuspensionModel,
    demands: DemandModel,
) -> Result<JobSequence> {
    if horizon == 0 {
        return Err(Error::JobSequence("horizon must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut behaviors = Vec::new();
    for (task_id, task) in ts.iter().enumerate() {
        let period = task.min_interarrival;
        let slack = Exp::new(2.0 / period as f64).expect("positive rate");
        let mut release = match releases {
            ReleaseModel::Periodic => 0,
            ReleaseModel::SporadicJittered => jitter(&mut rng, &slack),
        };
        let mut job = 0;
        while release < horizon {
            let demand = match demands {
                DemandModel::Wcet => task.wcet,
                DemandModel::Random => rng.random_range(0..=task.wcet),
            };
            let phases = phases_for(&mut rng, demand, task.max_suspension, suspensions);
            behaviors.push(JobBehavior { task: task_id, job, release, demand, phases });
            job += 1;
            release += period;
            if releases == ReleaseModel::SporadicJittered {
                release += jitter(&mut rng, &slack);
            }
        }
    }
    JobSequence::new(behaviors, horizon, ts)
}

fn jitter(rng: &mut ChaCha8Rng, slack: &Exp<f64>) -> Tick {
    if rng.random_bool(0.5) {
        0
    } else {
        slack.sample(rng).floor() as Tick
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn periodic_wcet_no_suspension() {
        let ts = TaskSet::from_tuples(&[(2, 0, 5, 5)]).unwrap();
        let seq = generate_job_sequence(&ts, 10, 1, ReleaseModel::Periodic, SuspensionModel::None, DemandModel::Wcet)
            .unwrap();
        let releases: Vec<_> = seq.behaviors.iter().map(|b| (b.release, b.demand)).collect();
        assert_eq!(releases, vec![(0, 2), (5, 2)]);
    }

    #[test]
    fn single_block_follows_first_tick() {
        let ts = TaskSet::from_tuples(&[(3, 4, 10, 10)]).unwrap();
        let seq = generate_job_sequence(
            &ts,
            5,
            1,
            ReleaseModel::Periodic,
            SuspensionModel::MaxSingleBlock,
            DemandModel::Wcet,
        )
        .unwrap();
        assert_eq!(seq.behaviors[0].phases, vec![Phase { execute: 1, suspend: 4 }, Phase { execute: 2, suspend: 0 }]);
    }

    #[test]
    fn validation_catches_violations() {
        let ts = TaskSet::from_tuples(&[(2, 1, 5, 5)]).unwrap();
        let job = |job, release, execute, suspend| JobBehavior {
            task: 0,
            job,
            release,
            demand: execute,
            phases: vec![Phase { execute, suspend }],
        };
        assert!(JobSequence::new(vec![job(0, 0, 2, 1), job(1, 5, 2, 0)], 10, &ts).is_ok());
        assert!(JobSequence::new(vec![job(0, 0, 2, 1), job(1, 4, 2, 0)], 10, &ts).is_err());
        assert!(JobSequence::new(vec![job(0, 0, 3, 0)], 10, &ts).is_err());
        assert!(JobSequence::new(vec![job(0, 0, 2, 2)], 10, &ts).is_err());
        assert!(JobSequence::new(vec![job(0, 10, 2, 0)], 10, &ts).is_err());
        assert!(JobSequence::new(vec![job(1, 0, 2, 0)], 10, &ts).is_err());
    }

    proptest! {
        #[test]
        fn generated_sequences_are_valid_and_deterministic(seed in any::<u64>(), jittered in any::<bool>(), model in 0usize..3, random_demand in any::<bool>()) {
            let ts = TaskSet::from_tuples(&[(2, 3, 5, 5), (7, 3, 16, 16), (0, 4, 9, 7)]).unwrap();
            let releases = if jittered { ReleaseModel::SporadicJittered } else { ReleaseModel::Periodic };
            let susp = [SuspensionModel::None, SuspensionModel::MaxSingleBlock, SuspensionModel::RandomPhases][model];
            let demands = if random_demand { DemandModel::Random } else { DemandModel::Wcet };
            let a = generate_job_sequence(&ts, 200, seed, releases, susp, demands).unwrap();
            let b = generate_job_sequence(&ts, 200, seed, releases, susp, demands).unwrap();
            prop_assert!(a.validate(&ts).is_ok());
            prop_assert_eq!(a, b);
        }
    }
}
