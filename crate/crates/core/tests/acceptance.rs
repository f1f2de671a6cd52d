//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance` runs every criterion; trailing numbers
//! (`cargo test --test acceptance -- 1 4`) select a subset. The process
//! exits non-zero if any selected criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use el_sched::analysis::{baseline_susp_obl, test_fixed, test_variable, TestConfig};
use el_sched::experiments::{
    cell_seed, find_non_dominance_pair, fixed_vs_variable_campaign, lambda_sweep, overload_campaign,
    partition_campaign, runtime_benchmark, soundness_campaign, tfp_equivalence_campaign, CampaignConfig, LambdaFamily,
    NonDominanceConfig, SweepConfig, TestKind,
};
use el_sched::generator::{synthesize, GenSpec};
use el_sched::sim::{check_feasibility, simulate_el, JobBehavior, JobSequence, Phase};
use el_sched::time::ceil_div;
use el_sched::{derive_priority_points, PriorityAssignment, PriorityPolicy, TaskSet};
use num::rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Master seed shared by the fuzz corpora.
const SEED: u64 = 20_240_917;

/// Master seed of the λ sweep.
const LAMBDA_SEED: u64 = 5;

/// Master seed of the non-dominance search, and the draw indices of the
/// witnesses it finds, per deadline factor: (x numerator, x denominator,
/// fixed-only index, variable-only index).
const NON_DOMINANCE_SEED: u64 = 1;
const WITNESSES: [(u64, u64, u64, u64); 2] = [(6, 5, 822, 7), (3, 2, 3252, 7)];

/// Number, name and check of one criterion.
type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed <= limit
}

fn fig1_golden() -> Outcome {
    let ts = TaskSet::from_tuples(&[(2, 0, 5, 5), (7, 3, 16, 16)]).unwrap();
    let start = Instant::now();
    let mut jobs: Vec<JobBehavior> = (0..3)
        .map(|j| JobBehavior {
            task: 0,
            job: j,
            release: 5 * j as u64,
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
    let elapsed = start.elapsed();
    let t1 = trace.task_executions(0);
    let t2 = trace.task_executions(1);
    let susp: Vec<_> = trace.suspensions.iter().map(|s| (s.start, s.end)).collect();
    let feasible = check_feasibility(&trace, &ts);
    let ok = t1 == [(0, 2), (5, 7), (13, 15)] && t2 == [(2, 3), (7, 13)] && susp == [(3, 6)] && feasible;
    outcome(
        ok && within(Duration::from_millis(10), elapsed),
        format!("τ1 {t1:?}, τ2 {t2:?}, suspension {susp:?}, feasible {feasible}, {elapsed:?}"),
    )
}

fn soundness_and_dominance() -> (Outcome, Outcome) {
    let start = Instant::now();
    let r = soundness_campaign(&CampaignConfig::new(1000, SEED)).unwrap();
    let elapsed = start.elapsed();
    let sound = outcome(
        r.soundness.passed() && within(Duration::from_secs(600), elapsed),
        format!(
            "{} sets, accepted fixed {} / variable {}, {} simulations, {} failures, {:.1?}",
            r.soundness.examined,
            r.accepted_fixed,
            r.accepted_variable,
            r.soundness.checks,
            r.soundness.failure_count,
            elapsed
        ),
    );
    for f in &r.soundness.failures {
        eprintln!("    {f}");
    }
    // The corpus has suspensions up to half the slack, where the baseline
    // rarely accepts anything. A light-suspension corpus exercises the
    // implication as well.
    let (light_accepted, light_bad) = light_suspension_dominance(1000);
    let dom = outcome(
        r.dominance.passed() && light_bad == 0,
        format!(
            "baseline accepted {} sets, {} not accepted by the fixed test; light-suspension corpus: baseline accepted {light_accepted} of 1000, {light_bad} not accepted by the fixed test",
            r.accepted_baseline, r.dominance.failure_count
        ),
    );
    (sound, dom)
}

fn light_suspension_dominance(sets: u64) -> (u64, u64) {
    let (mut accepted, mut bad) = (0, 0);
    let cfg = TestConfig::default();
    for i in 0..sets {
        let u = Ratio::new(10 + 5 * (i % 18), 100);
        let spec = GenSpec {
            suspension_factor_range: (Ratio::from_integer(0), Ratio::new(1, 20)),
            ..GenSpec::new(10, u, cell_seed(SEED, u, Ratio::from_integer(1), i))
        };
        let ts = synthesize(&spec).unwrap().taskset;
        let pa = derive_priority_points(&ts, &PriorityPolicy::Edf).unwrap();
        if baseline_susp_obl(&ts, &pa, &cfg).unwrap().verdict {
            accepted += 1;
            bad += u64::from(!test_fixed(&ts, &pa, &cfg).unwrap().verdict);
        }
    }
    (accepted, bad)
}

fn overload() -> Outcome {
    let r = overload_campaign(&CampaignConfig::new(10_000, SEED)).unwrap();
    outcome(r.passed(), format!("{} sets with U in (1, 2], {} accepted by some test", r.examined, r.failure_count))
}

fn fixed_vs_variable() -> Outcome {
    let r = fixed_vs_variable_campaign(&CampaignConfig::new(1000, SEED)).unwrap();
    outcome(r.passed(), format!("{} constrained sets, {} mismatches", r.examined, r.failure_count))
}

fn tfp_equivalence() -> Outcome {
    let cfg = CampaignConfig { sims_per_set: 10, ..CampaignConfig::new(20_000, SEED) };
    let r = tfp_equivalence_campaign(&cfg, 200).unwrap();
    outcome(
        r.passed(),
        format!("{} sets drawn, {} trace pairs compared, {} failures", r.examined, r.checks, r.failure_count),
    )
}

fn partition() -> Outcome {
    let cfg = CampaignConfig {
        n: 6,
        utilizations: (6..=19).map(|k| Ratio::new(5 * k, 100)).collect(),
        ..CampaignConfig::new(500, SEED)
    };
    let r = partition_campaign(&cfg, 50).unwrap();
    outcome(r.passed(), format!("{} traces, {} identity checks, {} failures", r.examined, r.checks, r.failure_count))
}

fn lambda() -> Outcome {
    let cfg = SweepConfig { master_seed: LAMBDA_SEED, ..SweepConfig::default() };
    let lambdas: Vec<i64> = (-10..=10).collect();
    let mut ok = true;
    let mut strict = Vec::new();
    for family in [LambdaFamily::Eqdf, LambdaFamily::Saedf] {
        let sweep = lambda_sweep(&cfg, &lambdas, family, TestKind::Fixed).unwrap();
        for cell in sweep.rows.chunks(lambdas.len() + 1) {
            let zero = &cell[10];
            let best = &cell[lambdas.len()];
            assert_eq!(zero.policy, format!("{family}:0"));
            ok &= best.accepted >= zero.accepted;
            if best.accepted > zero.accepted {
                strict.push(format!("{family}@{}", zero.utilization));
            }
        }
    }
    outcome(ok, format!("best-λ ≥ λ=0 in every cell; strictly better at {}", strict.join(" ")))
}

fn negative_ceiling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut bad = 0;
    for _ in 0..200 {
        let num: i64 = rng.random_range(-1_000_000..=1_000_000);
        let den: i64 = rng.random_range(1..=10_000);
        if ceil_div(num, den) != Ratio::new(num, den).ceil().to_integer() {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("200 signed pairs, {bad} mismatches"))
}

fn non_dominance() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (xn, xd, fixed_idx, var_idx) in WITNESSES {
        let x = Ratio::new(xn, xd);
        let mut seed = NON_DOMINANCE_SEED;
        let mut r = find_non_dominance_pair(&NonDominanceConfig::new(x, 100_000, seed)).unwrap();
        if !r.complete() {
            seed = NON_DOMINANCE_SEED + 1;
            r = find_non_dominance_pair(&NonDominanceConfig::new(x, 100_000, seed)).unwrap();
        }
        let idx = |w: &Option<el_sched::experiments::Witness>| w.as_ref().map(|w| w.index);
        let found = (idx(&r.fixed_only), idx(&r.variable_only));
        // Pinned witnesses must rebuild from their seeds alone.
        let pinned = seed == NON_DOMINANCE_SEED && found == (Some(fixed_idx), Some(var_idx));
        let rebuilds = [&r.fixed_only, &r.variable_only]
            .into_iter()
            .flatten()
            .all(|w| synthesize(&w.spec).unwrap().taskset == w.taskset);
        // Re-run both tests on the pinned draws directly.
        let cfg = NonDominanceConfig::new(x, 100_000, NON_DOMINANCE_SEED);
        let verdicts = |i: u64| {
            let ts = synthesize(&cfg.spec(i)).unwrap().taskset;
            let pa = derive_priority_points(&ts, &cfg.policy).unwrap();
            (
                test_fixed(&ts, &pa, &cfg.test_config).unwrap().verdict,
                test_variable(&ts, &pa, &cfg.test_config).unwrap().verdict,
            )
        };
        let direct = verdicts(fixed_idx) == (true, false) && verdicts(var_idx) == (false, true);
        ok &= r.complete() && pinned && rebuilds && direct;
        parts.push(format!(
            "x={x}: fixed-only {:?} variable-only {:?} (seed {seed}, {} drawn, pinned {pinned})",
            r.fixed_only.as_ref().map(|w| (w.index, w.spec.seed)),
            r.variable_only.as_ref().map(|w| (w.index, w.spec.seed)),
            r.examined
        ));
    }
    let elapsed = start.elapsed();
    outcome(ok && within(Duration::from_secs(1800), elapsed), format!("{}; {elapsed:.1?}", parts.join("; ")))
}

fn runtime() -> Outcome {
    let utils: Vec<Ratio<u64>> = [3, 5, 7, 9].iter().map(|&p| Ratio::new(p, 10)).collect();
    let rows = runtime_benchmark(&[50], &utils, 5, SEED, &TestConfig::default()).unwrap();
    let r = &rows[0];
    outcome(
        r.mean_seconds < 1.0,
        format!("n=50: mean {:.4} s, max {:.4} s over {} sets", r.mean_seconds, r.max_seconds, r.sets),
    )
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: u32| selected.is_empty() || selected.contains(&n);
    let mut results: Vec<(u32, bool)> = Vec::new();
    let mut report = |n: u32, name: &str, o: Outcome| {
        println!("criterion {n:>2} {}: {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, o.passed));
    };

    if wanted(1) {
        report(1, "worked-example golden trace", fig1_golden());
    }
    // Criteria 2 and 7 share one corpus.
    if wanted(2) || wanted(7) {
        let (sound, dom) = soundness_and_dominance();
        if wanted(2) {
            report(2, "soundness fuzz", sound);
        }
        if wanted(7) {
            report(7, "baseline dominance", dom);
        }
    }
    let rest: [Criterion; 8] = [
        (3, "U > 1 rejection", overload),
        (4, "fixed ≡ variable on constrained deadlines", fixed_vs_variable),
        (5, "EL prefix-sum ≡ TFP traces", tfp_equivalence),
        (6, "partition identities", partition),
        (8, "λ-sweep construction", lambda),
        (9, "negative-ceiling suite", negative_ceiling),
        (10, "non-dominance witnesses", non_dominance),
        (11, "runtime n=50", runtime),
    ];
    for (n, name, f) in rest {
        if wanted(n) {
            let start = Instant::now();
            let mut o = f();
            o.detail = format!("{} [{:.1?}]", o.detail, start.elapsed());
            report(n, name, o);
        }
    }

    let failed: Vec<u32> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
