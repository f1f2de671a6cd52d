//! Fixed analysis window: the window starts `b ∈ [0, D_k)` ticks after the
//! release of the job under analysis.

use crate::error::{Error, Result};
use crate::model::TaskSet;
use crate::policy::{derive_priority_points, PriorityAssignment, PriorityPolicy};
use crate::time::{SignedTick, Tick};

use super::{
    check_index, grid_min, run_passes, to_ticks, AnalysisResult, ChosenOffsets, Context, TaskOutcome, TestConfig,
    WcrtBounds,
};

/// Response-time bound of `τ_k` for window offset `b`:
///
/// `⌈(D_k - b) / T_k⌉·(C_k + S_k) + b + Σ_{i≠k} max(⌈(G_k^i + R̃_i - b) / T_i⌉, 0)·C_i`
pub fn rtilde_fixed(k: usize, b: Tick, bounds: &WcrtBounds, ts: &TaskSet, pa: &PriorityAssignment) -> Result<Tick> {
    check_index(ts, k)?;
    if b >= ts[k].deadline {
        return Err(Error::OffsetRange { offset: b, limit: ts[k].deadline });
    }
    if bounds.r_tilde.len() != ts.len() {
        return Err(Error::AssignmentLength { expected: ts.len(), got: bounds.r_tilde.len() });
    }
    let ctx = Context::new(ts, pa)?;
    let r: Vec<SignedTick> = bounds.r_tilde.iter().map(|&v| v as SignedTick).collect();
    Ok(ctx.rtilde_fixed(k, b as SignedTick, &r) as Tick)
}

/// Sufficient schedulability test with a fixed analysis window.
///
/// Every task's bound is minimised over the offset grid
/// `b = 0, step, 2·step, … < D_k` with `step = max(1, round(η·D_k))`.
pub fn test_fixed(ts: &TaskSet, pa: &PriorityAssignment, cfg: &TestConfig) -> Result<AnalysisResult> {
    if ts.is_empty() {
        return Err(Error::EmptyTaskSet);
    }
    let ctx = Context::new(ts, pa)?;
    let steps: Vec<SignedTick> = ts.iter().map(|t| cfg.step(t.deadline) as SignedTick).collect();

    let (verdict, r_tilde, choices, iterations) =
        run_passes(&ctx, cfg, |k, r| match grid_min(ctx.d[k], steps[k], |b| ctx.rtilde_fixed(k, b, r)) {
            Some((value, b)) if value <= ctx.d[k] => TaskOutcome::Pass(value, b as Tick),
            _ => TaskOutcome::Fail,
        });

    Ok(AnalysisResult {
        verdict,
        bounds: WcrtBounds::new(to_ticks(&r_tilde)),
        offsets: ChosenOffsets::Fixed(choices),
        iterations,
    })
}

/// Task-level fixed-priority test: `ts` is in priority order (index 0
/// highest) and is checked as EL with `Π_i = D_0 + … + D_i`.
pub fn test_tfp(ts: &TaskSet, cfg: &TestConfig) -> Result<AnalysisResult> {
    let pa = derive_priority_points(ts, &PriorityPolicy::TfpEmulation)?;
    test_fixed(ts, &pa, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::Ratio;
    use proptest::prelude::*;

    /// Straight transcription of the bound with rational ceilings, used as
    /// an oracle against the integer implementation.
    fn oracle(k: usize, b: i64, r: &[i64], ts: &TaskSet, pa: &PriorityAssignment) -> i64 {
        let ceil = |n: i64, d: i64| Ratio::new(n, d).ceil().to_integer();
        let tk = ts[k];
        let mut total =
            ceil(tk.deadline as i64 - b, tk.min_interarrival as i64) * (tk.wcet + tk.max_suspension) as i64 + b;
        for (i, ti) in ts.iter().enumerate() {
            if i == k {
                continue;
            }
            let g = (tk.deadline as i64 - ti.wcet as i64).min(pa[k] - pa[i]);
            total += ceil(g + r[i] - b, ti.min_interarrival as i64).max(0) * ti.wcet as i64;
        }
        total
    }

    fn two() -> TaskSet {
        TaskSet::from_tuples(&[(1, 0, 5, 5), (2, 1, 16, 16)]).unwrap()
    }

    #[test]
    fn rtilde_fixed_examples() {
        let single = TaskSet::from_tuples(&[(1, 0, 2, 2)]).unwrap();
        let pa1 = PriorityAssignment::new(vec![2]);
        assert_eq!(rtilde_fixed(0, 0, &WcrtBounds::new(vec![2]), &single, &pa1).unwrap(), 1);

        let ts = two();
        let pa = PriorityAssignment::new(vec![5, 16]);
        let bounds = WcrtBounds::new(vec![5, 16]);
        assert_eq!(rtilde_fixed(1, 0, &bounds, &ts, &pa).unwrap(), 7);
        assert_eq!(oracle(1, 0, &[5, 16], &ts, &pa), 7);
        let bounds = WcrtBounds::new(vec![5, 7]);
        assert_eq!(rtilde_fixed(0, 0, &bounds, &ts, &pa).unwrap(), 1);
        assert_eq!(oracle(0, 0, &[5, 7], &ts, &pa), 1);
    }

    #[test]
    fn rtilde_fixed_rejects_bad_offset() {
        let ts = two();
        let pa = PriorityAssignment::new(vec![5, 16]);
        assert!(rtilde_fixed(0, 5, &WcrtBounds::new(vec![5, 16]), &ts, &pa).is_err());
        assert!(rtilde_fixed(2, 0, &WcrtBounds::new(vec![5, 16]), &ts, &pa).is_err());
    }

    #[test]
    fn test_fixed_examples() {
        let ts = two();
        let pa = derive_priority_points(&ts, &PriorityPolicy::Edf).unwrap();
        let res = test_fixed(&ts, &pa, &TestConfig::default()).unwrap();
        assert!(res.verdict);
        // Oracle: exhaustive grid evaluation (step is 1 tick for these
        // deadlines), τ2 before τ1, repeated for five passes.
        let mut r = [5, 16];
        for _ in 0..5 {
            r[1] = (0..16).map(|b| oracle(1, b, &r, &ts, &pa)).min().unwrap();
            r[0] = (0..5).map(|b| oracle(0, b, &r, &ts, &pa)).min().unwrap();
        }
        assert_eq!(r, [1, 6]);
        assert_eq!(res.bounds.r_tilde, vec![1, 6]);
        assert!(res.bounds.r_tilde[0] <= 5 && res.bounds.r_tilde[1] <= 16);

        let single = TaskSet::from_tuples(&[(1, 0, 2, 2)]).unwrap();
        let res = test_fixed(&single, &PriorityAssignment::new(vec![2]), &TestConfig::default()).unwrap();
        assert!(res.verdict);
        assert_eq!(res.bounds.r_tilde, vec![1]);

        let overloaded = TaskSet::from_tuples(&[(3, 0, 5, 5), (3, 0, 5, 5)]).unwrap();
        let pa = derive_priority_points(&overloaded, &PriorityPolicy::Edf).unwrap();
        assert!(!test_fixed(&overloaded, &pa, &TestConfig::default()).unwrap().verdict);
        assert!(test_fixed(&TaskSet::default(), &PriorityAssignment::new(vec![]), &TestConfig::default()).is_err());
    }

    #[test]
    fn fig1_set_gets_no_decision() {
        let ts = TaskSet::from_tuples(&[(2, 0, 5, 5), (7, 3, 16, 16)]).unwrap();
        let pa = PriorityAssignment::new(vec![4, 10]);
        let res = test_fixed(&ts, &pa, &TestConfig::default()).unwrap();
        // τ2 goes first (larger deadline) and passes; τ1 then fails for every b.
        let r2 = (0..16).map(|b| oracle(1, b, &[5, 16], &ts, &pa)).min().unwrap();
        assert_eq!(r2, 15);
        let r1 = (0..5).map(|b| oracle(0, b, &[5, r2], &ts, &pa)).min().unwrap();
        assert!(r1 > 5);
        assert!(!res.verdict);
        assert_eq!(res.bounds.r_tilde, vec![5, 15]);
        assert_eq!(res.offsets, ChosenOffsets::Fixed(vec![None, Some(1)]));
    }

    #[test]
    fn tfp_uses_prefix_sums() {
        let ts = two();
        let via_tfp = test_tfp(&ts, &TestConfig::default()).unwrap();
        let explicit = test_fixed(&ts, &PriorityAssignment::new(vec![5, 21]), &TestConfig::default()).unwrap();
        assert_eq!(via_tfp, explicit);
        let single = TaskSet::from_tuples(&[(1, 0, 2, 2)]).unwrap();
        let edf = test_fixed(&single, &PriorityAssignment::new(vec![2]), &TestConfig::default()).unwrap();
        assert_eq!(test_tfp(&single, &TestConfig::default()).unwrap().verdict, edf.verdict);
    }

    fn small_set() -> impl Strategy<Value = (TaskSet, Vec<i64>)> {
        prop::collection::vec((1u64..30, 0u64..10, 0u64..10, 0u64..40), 2..5).prop_flat_map(|raw| {
            let tasks: Vec<_> = raw
                .iter()
                .map(|&(t, c, s, extra)| {
                    let d = t + extra / 2;
                    (c.min(d), s, d, t)
                })
                .collect();
            let n = tasks.len();
            (Just(TaskSet::from_tuples(&tasks).unwrap()), prop::collection::vec(-40i64..60, n))
        })
    }

    proptest! {
        #[test]
        fn implementation_matches_oracle((ts, pp) in small_set(), r_seed in prop::collection::vec(0u64..60, 5)) {
            let pa = PriorityAssignment::new(pp);
            let r: Vec<u64> = ts.iter().zip(&r_seed).map(|(t, &v)| v.min(t.deadline)).collect();
            let ri: Vec<i64> = r.iter().map(|&v| v as i64).collect();
            let bounds = WcrtBounds::new(r.clone());
            for k in 0..ts.len() {
                for b in 0..ts[k].deadline {
                    prop_assert_eq!(rtilde_fixed(k, b, &bounds, &ts, &pa).unwrap() as i64, oracle(k, b as i64, &ri, &ts, &pa));
                }
            }
        }

        #[test]
        fn monotone_in_other_bounds_and_suspension((ts, pp) in small_set(), bump in 0u64..10, which in 0usize..4) {
            let pa = PriorityAssignment::new(pp);
            let n = ts.len();
            let base = WcrtBounds::from_deadlines(&ts);
            let lowered = WcrtBounds::new(base.r_tilde.iter().enumerate().map(|(i, &v)| if i == which % n { v.saturating_sub(bump) } else { v }).collect());
            let mut more_susp = ts.tasks().to_vec();
            more_susp[which % n].max_suspension += bump;
            let more_susp = TaskSet::new(more_susp).unwrap();
            for k in 0..n {
                for b in 0..ts[k].deadline {
                    let hi = rtilde_fixed(k, b, &base, &ts, &pa).unwrap();
                    if k != which % n {
                        prop_assert!(rtilde_fixed(k, b, &lowered, &ts, &pa).unwrap() <= hi);
                    } else {
                        prop_assert!(rtilde_fixed(k, b, &base, &more_susp, &pa).unwrap() >= hi);
                    }
                }
            }
        }

        #[test]
        fn verdict_implies_bounds_within_deadlines((ts, pp) in small_set()) {
            let pa = PriorityAssignment::new(pp);
            let res = test_fixed(&ts, &pa, &TestConfig::default()).unwrap();
            for (r, t) in res.bounds.r_tilde.iter().zip(ts.iter()) {
                prop_assert!(*r <= t.deadline);
            }
            if res.verdict {
                prop_assert!(ts.utilization() <= num::BigRational::from_integer(1.into()));
            }
        }
    }
}
