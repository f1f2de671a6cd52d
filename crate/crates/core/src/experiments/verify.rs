//! Randomized verification campaigns: the analysis checked against the
//! simulator and against itself on many generated task sets.

use std::fmt;

use num::rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{baseline_susp_obl, test_fixed, test_tfp, test_variable, AnalysisResult, TestConfig};
use crate::error::Result;
use crate::generator::{batch_seed, splitmix64, synthesize, GenSpec};
use crate::model::TaskSet;
use crate::policy::{derive_priority_points, PriorityAssignment, PriorityPolicy};
use crate::sim::{
    check_feasibility, generate_job_sequence, simulate_el, simulate_tfp, trace_b_quantities, DemandModel, ReleaseModel,
    ScheduleTrace, SuspensionModel,
};
use crate::time::Tick;

use super::worker_pool;

/// Failure messages kept per report; the count covers all of them.
const KEPT_FAILURES: usize = 20;

/// Sets drawn per parallel batch by the campaigns that stop early.
const CHUNK: u64 = 256;

/// Shared parameters: set `i` has utilization `utilizations[i mod len]` and
/// seed `batch_seed(master_seed, i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignConfig {
    pub sets: u64,
    pub n: usize,
    pub utilizations: Vec<Ratio<u64>>,
    pub deadline_factor: Ratio<u64>,
    pub master_seed: u64,
    pub test_config: TestConfig,
    /// Job sequences simulated per set, where a campaign simulates.
    pub sims_per_set: u64,
    /// Simulation horizon as a multiple of the largest period.
    pub horizon_factor: u64,
}

impl CampaignConfig {
    /// Ten tasks, utilizations 10 % to 95 % in steps of 5 %, implicit
    /// deadlines, 100 simulations of 20 periods of the slowest task.
    pub fn new(sets: u64, master_seed: u64) -> Self {
        CampaignConfig {
            sets,
            n: 10,
            utilizations: (2..=19).map(|k| Ratio::new(5 * k, 100)).collect(),
            deadline_factor: Ratio::from_integer(1),
            master_seed,
            test_config: TestConfig::default(),
            sims_per_set: 100,
            horizon_factor: 20,
        }
    }

    pub fn draw(&self, index: u64) -> Result<(TaskSet, u64)> {
        let u = self.utilizations[(index % self.utilizations.len() as u64) as usize];
        let seed = batch_seed(self.master_seed, index);
        let spec = GenSpec::new(self.n, u, seed).with_deadline_factor(self.deadline_factor);
        Ok((synthesize(&spec)?.taskset, seed))
    }

    fn horizon(&self, ts: &TaskSet) -> Tick {
        self.horizon_factor * ts.max_interarrival()
    }
}

/// Outcome of one campaign: how much was checked and what failed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CampaignReport {
    pub name: String,
    /// Task sets (or traces) drawn.
    pub examined: u64,
    /// Individual comparisons performed.
    pub checks: u64,
    pub failure_count: u64,
    /// The first few failures, described.
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl CampaignReport {
    fn new(name: &str) -> Self {
        CampaignReport { name: name.into(), ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < KEPT_FAILURES {
            self.failures.push(msg);
        }
    }

    fn absorb(&mut self, checks: u64, failures: Vec<String>) {
        self.checks += checks;
        for f in failures {
            self.fail(f);
        }
    }
}

impl fmt::Display for CampaignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        writeln!(
            f,
            "{}: {verdict} ({} examined, {} checks, {} failures)",
            self.name, self.examined, self.checks, self.failure_count
        )?;
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        for m in &self.failures {
            writeln!(f, "  failure: {m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundnessReport {
    /// No simulated deadline miss and no response time above a reported
    /// bound, for every set accepted by the fixed or variable test.
    pub soundness: CampaignReport,
    /// Baseline acceptance implies fixed-window acceptance, per set.
    pub dominance: CampaignReport,
    pub accepted_fixed: u64,
    pub accepted_variable: u64,
    pub accepted_baseline: u64,
}

fn simulation_checks(
    ts: &TaskSet,
    pa: &PriorityAssignment,
    trace: &ScheduleTrace,
    accepted: &[(&str, &AnalysisResult)],
    label: &str,
) -> Vec<String> {
    let mut out = Vec::new();
    if !check_feasibility(trace, ts) {
        let miss = trace
            .jobs
            .iter()
            .find(|j| j.finish.map_or(j.deadline <= trace.horizon, |f| f > j.deadline))
            .map(|j| format!("job ({}, {}) released {}", j.id.task, j.id.job, j.release))
            .unwrap_or_default();
        out.push(format!("{label}: deadline miss, {miss}, Π = {:?}", pa.pp));
    }
    for j in &trace.jobs {
        let Some(r) = j.response_time() else { continue };
        for (name, res) in accepted {
            if r > res.bounds.r_tilde[j.id.task] {
                out.push(format!(
                    "{label}: job ({}, {}) response {r} exceeds {name} bound {}",
                    j.id.task, j.id.job, res.bounds.r_tilde[j.id.task]
                ));
            }
        }
    }
    out
}

/// EDF with both tests plus the baseline; every set accepted by the fixed or
/// variable test is simulated `sims_per_set` times with jittered sporadic
/// releases, random suspension phases and random demands.
pub fn soundness_campaign(cfg: &CampaignConfig) -> Result<SoundnessReport> {
    struct PerSet {
        fixed: bool,
        variable: bool,
        baseline: bool,
        sims: u64,
        failures: Vec<String>,
        dominance: Option<String>,
    }
    let outcomes: Vec<PerSet> = worker_pool()?.install(|| {
        (0..cfg.sets)
            .into_par_iter()
            .map(|i| {
                let (ts, seed) = cfg.draw(i)?;
                let pa = derive_priority_points(&ts, &PriorityPolicy::Edf)?;
                let fixed = test_fixed(&ts, &pa, &cfg.test_config)?;
                let variable = test_variable(&ts, &pa, &cfg.test_config)?;
                let baseline = baseline_susp_obl(&ts, &pa, &cfg.test_config)?;
                let dominance = (baseline.verdict && !fixed.verdict)
                    .then(|| format!("set {i} (seed {seed}): baseline accepts, fixed does not"));
                let accepted: Vec<(&str, &AnalysisResult)> =
                    [("fixed", &fixed), ("variable", &variable)].into_iter().filter(|(_, r)| r.verdict).collect();
                let mut failures = Vec::new();
                let mut sims = 0;
                if !accepted.is_empty() {
                    for s in 0..cfg.sims_per_set {
                        let seq = generate_job_sequence(
                            &ts,
                            cfg.horizon(&ts),
                            splitmix64(seed ^ s),
                            ReleaseModel::SporadicJittered,
                            SuspensionModel::RandomPhases,
                            DemandModel::Random,
                        )?;
                        let trace = simulate_el(&ts, &pa, &seq)?;
                        failures.extend(simulation_checks(
                            &ts,
                            &pa,
                            &trace,
                            &accepted,
                            &format!("set {i} (seed {seed}) sim {s}"),
                        ));
                        sims += 1;
                    }
                }
                Ok(PerSet {
                    fixed: fixed.verdict,
                    variable: variable.verdict,
                    baseline: baseline.verdict,
                    sims,
                    failures,
                    dominance,
                })
            })
            .collect::<Result<_>>()
    })?;

    let mut soundness = CampaignReport::new("soundness");
    let mut dominance = CampaignReport::new("baseline-dominance");
    let count = |f: fn(&PerSet) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    for o in &outcomes {
        soundness.absorb(o.sims, o.failures.clone());
        dominance.absorb(1, o.dominance.clone().into_iter().collect());
    }
    soundness.examined = cfg.sets;
    dominance.examined = cfg.sets;
    let report = SoundnessReport {
        accepted_fixed: count(|o| o.fixed),
        accepted_variable: count(|o| o.variable),
        accepted_baseline: count(|o| o.baseline),
        soundness,
        dominance,
    };
    let mut report = report;
    report.soundness.notes.push(format!(
        "accepted: fixed {}, variable {}, baseline {} of {}; {} simulations",
        report.accepted_fixed, report.accepted_variable, report.accepted_baseline, cfg.sets, report.soundness.checks
    ));
    Ok(report)
}

/// For sets accepted by the task-level fixed-priority test, EL scheduling
/// with prefix-sum priority points must produce the very same schedule as
/// fixed-priority scheduling. Draws at most `cfg.sets` sets and stops after
/// `target` accepted ones.
pub fn tfp_equivalence_campaign(cfg: &CampaignConfig, target: u64) -> Result<CampaignReport> {
    let mut report = CampaignReport::new("tfp-equivalence");
    let pool = worker_pool()?;
    let mut accepted = 0;
    let mut next = 0;
    while accepted < target && next < cfg.sets {
        let end = (next + CHUNK).min(cfg.sets);
        let chunk: Vec<Option<(u64, Vec<String>)>> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|i| {
                    let (ts, seed) = cfg.draw(i)?;
                    if !test_tfp(&ts, &cfg.test_config)?.verdict {
                        return Ok(None);
                    }
                    let pa = derive_priority_points(&ts, &PriorityPolicy::TfpEmulation)?;
                    let mut failures = Vec::new();
                    for s in 0..cfg.sims_per_set {
                        let seq = generate_job_sequence(
                            &ts,
                            cfg.horizon(&ts),
                            splitmix64(seed ^ s),
                            ReleaseModel::SporadicJittered,
                            SuspensionModel::RandomPhases,
                            DemandModel::Random,
                        )?;
                        if simulate_el(&ts, &pa, &seq)?.export() != simulate_tfp(&ts, &seq)?.export() {
                            failures.push(format!("set {i} (seed {seed}) sequence {s}: traces differ"));
                        }
                    }
                    Ok(Some((cfg.sims_per_set, failures)))
                })
                .collect::<Result<_>>()
        })?;
        for (checks, failures) in chunk.into_iter().flatten() {
            if accepted == target {
                break;
            }
            accepted += 1;
            report.absorb(checks, failures);
        }
        report.examined = end;
        next = end;
    }
    report.notes.push(format!("{accepted} accepted sets compared (target {target})"));
    if accepted < target {
        report.fail(format!("only {accepted} of {target} sets accepted within {} draws", cfg.sets));
    }
    Ok(report)
}

/// Identical verdicts and bound vectors from both tests. Meant for
/// constrained deadlines, where the two coincide.
pub fn fixed_vs_variable_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let failures: Vec<Option<String>> = worker_pool()?.install(|| {
        (0..cfg.sets)
            .into_par_iter()
            .map(|i| {
                let (ts, seed) = cfg.draw(i)?;
                let pa = derive_priority_points(&ts, &PriorityPolicy::Edf)?;
                let f = test_fixed(&ts, &pa, &cfg.test_config)?;
                let v = test_variable(&ts, &pa, &cfg.test_config)?;
                Ok((f.verdict != v.verdict || f.bounds != v.bounds).then(|| {
                    format!(
                        "set {i} (seed {seed}): fixed {} {:?} vs variable {} {:?}",
                        f.verdict, f.bounds.r_tilde, v.verdict, v.bounds.r_tilde
                    )
                }))
            })
            .collect::<Result<_>>()
    })?;
    let mut report = CampaignReport::new("fixed-vs-variable");
    report.examined = cfg.sets;
    report.absorb(cfg.sets, failures.into_iter().flatten().collect());
    Ok(report)
}

/// Sets with total utilization in `(1, 2]` (`cfg.utilizations` is ignored)
/// must be rejected by both tests.
pub fn overload_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    let overloaded = CampaignConfig { utilizations: (101..=200).map(|p| Ratio::new(p, 100)).collect(), ..cfg.clone() };
    let failures: Vec<Option<String>> = worker_pool()?.install(|| {
        (0..cfg.sets)
            .into_par_iter()
            .map(|i| {
                let (ts, seed) = overloaded.draw(i)?;
                let pa = derive_priority_points(&ts, &PriorityPolicy::Edf)?;
                let f = test_fixed(&ts, &pa, &cfg.test_config)?.verdict;
                let v = test_variable(&ts, &pa, &cfg.test_config)?.verdict;
                Ok((f || v).then(|| {
                    format!("set {i} (seed {seed}, U = {:.4}): fixed {f}, variable {v}", ts.utilization_f64())
                }))
            })
            .collect::<Result<_>>()
    })?;
    let mut report = CampaignReport::new("overload");
    report.examined = cfg.sets;
    report.absorb(cfg.sets * 2, failures.into_iter().flatten().collect());
    Ok(report)
}

/// On `cfg.sets` random traces, the processor-state quantities of a task
/// partition every probed interval, and the per-job refinement sums to the
/// task-level quantity. `probes` random `(k, c, d)` per trace.
///
/// Periods are drawn from `[10, 400]` ticks so traces stay small and dense.
pub fn partition_campaign(cfg: &CampaignConfig, probes: u64) -> Result<CampaignReport> {
    let policies = [
        PriorityPolicy::Edf,
        PriorityPolicy::Fifo,
        PriorityPolicy::Eqdf(Ratio::from_integer(-1)),
        PriorityPolicy::Saedf(Ratio::from_integer(2)),
    ];
    let susp = [SuspensionModel::RandomPhases, SuspensionModel::MaxSingleBlock, SuspensionModel::None];
    let failures: Vec<Vec<String>> = worker_pool()?.install(|| {
        (0..cfg.sets)
            .into_par_iter()
            .map(|i| {
                let u = cfg.utilizations[(i % cfg.utilizations.len() as u64) as usize];
                let seed = batch_seed(cfg.master_seed, i);
                let mut spec = GenSpec::new(cfg.n, u, seed).with_deadline_factor(cfg.deadline_factor);
                spec.period_range = (10, 400);
                let ts = synthesize(&spec)?.taskset;
                let pa = derive_priority_points(&ts, &policies[(i % 4) as usize])?;
                let horizon = cfg.horizon(&ts);
                let seq = generate_job_sequence(
                    &ts,
                    horizon,
                    seed,
                    ReleaseModel::SporadicJittered,
                    susp[(i % 3) as usize],
                    DemandModel::Random,
                )?;
                let trace = simulate_el(&ts, &pa, &seq)?;
                let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
                let with_jobs: Vec<usize> = (0..ts.len()).filter(|&k| !trace.jobs_of(k).is_empty()).collect();
                let mut out = Vec::new();
                if with_jobs.is_empty() {
                    return Ok(out);
                }
                for _ in 0..probes {
                    let k = with_jobs[rng.random_range(0..with_jobs.len())];
                    let (a, b) = (rng.random_range(0..=horizon), rng.random_range(0..=horizon));
                    let (c, d) = (a.min(b), a.max(b));
                    let ell = rng.random_range(0..trace.jobs_of(k).len());
                    let q = trace_b_quantities(&trace, &ts, k, c, d, ell)?;
                    let total = q.b_tilde + q.b_k + q.b_i_k.iter().sum::<Tick>();
                    if total != d - c {
                        out.push(format!("trace {i} (seed {seed}) k={k} [{c},{d}): partition sums to {total}"));
                    }
                    let refined: Tick = q.b_k_j.values().sum();
                    if refined != q.b_k {
                        out.push(format!(
                            "trace {i} (seed {seed}) k={k} [{c},{d}): B_k = {} but Σ_j B_k,j = {refined}",
                            q.b_k
                        ));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()
    })?;
    let mut report = CampaignReport::new("partition");
    report.examined = cfg.sets;
    report.absorb(cfg.sets * probes * 2, failures.into_iter().flatten().collect());
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonDominanceConfig {
    pub n: usize,
    pub utilizations: Vec<Ratio<u64>>,
    pub deadline_factor: Ratio<u64>,
    pub policy: PriorityPolicy,
    pub test_config: TestConfig,
    /// Sets drawn at most.
    pub budget: u64,
    pub master_seed: u64,
}

impl NonDominanceConfig {
    /// Deadline-monotonic priorities, ten tasks, utilizations 10 % to 95 %.
    pub fn new(deadline_factor: Ratio<u64>, budget: u64, master_seed: u64) -> Self {
        NonDominanceConfig {
            n: 10,
            utilizations: (2..=19).map(|k| Ratio::new(5 * k, 100)).collect(),
            deadline_factor,
            policy: PriorityPolicy::DeadlineMonotonic,
            test_config: TestConfig::default(),
            budget,
            master_seed,
        }
    }

    /// The [`GenSpec`] that regenerates set `index`.
    pub fn spec(&self, index: u64) -> GenSpec {
        let u = self.utilizations[(index % self.utilizations.len() as u64) as usize];
        GenSpec::new(self.n, u, batch_seed(self.master_seed, index)).with_deadline_factor(self.deadline_factor)
    }
}

/// A set on which the two tests disagree; `synthesize(&spec)` rebuilds it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub index: u64,
    pub spec: GenSpec,
    pub taskset: TaskSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonDominance {
    /// Accepted by the fixed-window test only.
    pub fixed_only: Option<Witness>,
    /// Accepted by the variable-window test only.
    pub variable_only: Option<Witness>,
    pub examined: u64,
}

impl NonDominance {
    pub fn complete(&self) -> bool {
        self.fixed_only.is_some() && self.variable_only.is_some()
    }
}

/// Draws sets until both tests have each accepted a set the other rejects,
/// or the budget runs out. The witness in each direction is the first one
/// in draw order.
pub fn find_non_dominance_pair(cfg: &NonDominanceConfig) -> Result<NonDominance> {
    let pool = worker_pool()?;
    let mut out = NonDominance { fixed_only: None, variable_only: None, examined: 0 };
    let mut next = 0;
    while !out.complete() && next < cfg.budget {
        let end = (next + CHUNK).min(cfg.budget);
        let chunk: Vec<(u64, GenSpec, TaskSet, bool, bool)> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|i| {
                    let spec = cfg.spec(i);
                    let ts = synthesize(&spec)?.taskset;
                    let pa = derive_priority_points(&ts, &cfg.policy)?;
                    let f = test_fixed(&ts, &pa, &cfg.test_config)?.verdict;
                    let v = test_variable(&ts, &pa, &cfg.test_config)?.verdict;
                    Ok((i, spec, ts, f, v))
                })
                .collect::<Result<Vec<_>>>()
                .map(|all| all.into_iter().filter(|r| r.3 != r.4).collect())
        })?;
        for (index, spec, taskset, f, _) in chunk {
            let slot = if f { &mut out.fixed_only } else { &mut out.variable_only };
            if slot.is_none() {
                *slot = Some(Witness { index, spec, taskset });
            }
        }
        out.examined = end;
        next = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(sets: u64) -> CampaignConfig {
        CampaignConfig { n: 4, sims_per_set: 3, horizon_factor: 3, ..CampaignConfig::new(sets, 5) }
    }

    #[test]
    fn soundness_on_a_small_corpus() {
        let r = soundness_campaign(&tiny(20)).unwrap();
        assert!(r.soundness.passed(), "{}", r.soundness);
        assert!(r.dominance.passed(), "{}", r.dominance);
        assert!(r.accepted_fixed > 0);
        assert!(r.accepted_baseline <= r.accepted_fixed);
    }

    #[test]
    fn small_campaigns_pass() {
        let cfg = tiny(20);
        assert!(fixed_vs_variable_campaign(&cfg).unwrap().passed());
        assert!(overload_campaign(&cfg).unwrap().passed());
        let p = partition_campaign(&CampaignConfig { horizon_factor: 5, ..cfg.clone() }, 10).unwrap();
        assert!(p.passed(), "{p}");
        assert_eq!(p.checks, 400);
        let t = tfp_equivalence_campaign(&cfg, 5).unwrap();
        assert!(t.passed(), "{t}");
    }

    #[test]
    fn tfp_campaign_reports_a_short_corpus() {
        let cfg = tiny(3);
        let t = tfp_equivalence_campaign(&cfg, 50).unwrap();
        assert!(!t.passed());
        assert_eq!(t.examined, 3);
    }

    #[test]
    fn constrained_deadlines_have_no_witness() {
        let mut cfg = NonDominanceConfig::new(Ratio::from_integer(1), 200, 1);
        cfg.n = 5;
        let r = find_non_dominance_pair(&cfg).unwrap();
        assert!(r.fixed_only.is_none() && r.variable_only.is_none());
        assert_eq!(r.examined, 200);
        let none = find_non_dominance_pair(&NonDominanceConfig { budget: 0, ..cfg }).unwrap();
        assert_eq!(none.examined, 0);
        assert!(!none.complete());
    }
}
