//! Variable analysis window: the window may start inside an active interval
//! of `τ_k`, up to `a` periods before the release of the job under analysis.

use crate::error::{Error, Result};
use crate::model::TaskSet;
use crate::policy::PriorityAssignment;
use crate::time::{SignedTick, Tick};

use super::{
    check_index, grid_min, run_passes, to_ticks, AnalysisResult, ChosenOffsets, Context, TaskOutcome, TestConfig,
    WcrtBounds, WindowChoice,
};

/// Response-time bound of the `(a+1)`-th job in an active interval of `τ_k`
/// for window position `x ∈ [0, a·T_k + D_k)`:
///
/// `min(a+1, ⌈(D_k - x + a·T_k) / T_k⌉)·(C_k + S_k)
///  + Σ_{i≠k} max(⌈(G_k^i + R̃_i - x + a·T_k) / T_i⌉, 0)·C_i + x - a·T_k`
///
/// The value is signed: for `a > 0` the last term can make it negative.
pub fn rtilde_var(
    k: usize,
    a: u32,
    x: Tick,
    bounds: &WcrtBounds,
    ts: &TaskSet,
    pa: &PriorityAssignment,
) -> Result<SignedTick> {
    check_index(ts, k)?;
    let limit = a as Tick * ts[k].min_interarrival + ts[k].deadline;
    if x >= limit {
        return Err(Error::OffsetRange { offset: x, limit });
    }
    if bounds.r_tilde.len() != ts.len() {
        return Err(Error::AssignmentLength { expected: ts.len(), got: bounds.r_tilde.len() });
    }
    let ctx = Context::new(ts, pa)?;
    let r: Vec<SignedTick> = bounds.r_tilde.iter().map(|&v| v as SignedTick).collect();
    Ok(ctx.rtilde_var(k, a as SignedTick, x as SignedTick, &r))
}

/// Sufficient schedulability test with a variable analysis window.
///
/// For each task the active-interval length `a = 0, 1, …, max_a` grows until
/// the minimised bound `R̃^a_k` drops to `T_k` or below. Every `R̃^a_k` on
/// the way must stay within `D_k`. The task's bound is then the largest
/// `R̃^a_k` seen, which keeps it a valid worst-case response-time bound for
/// use in the other tasks' interference terms.
pub fn test_variable(ts: &TaskSet, pa: &PriorityAssignment, cfg: &TestConfig) -> Result<AnalysisResult> {
    if ts.is_empty() {
        return Err(Error::EmptyTaskSet);
    }
    let ctx = Context::new(ts, pa)?;
    let steps: Vec<SignedTick> = ts.iter().map(|t| cfg.step(t.deadline) as SignedTick).collect();

    let (verdict, r_tilde, choices, iterations) = run_passes(&ctx, cfg, |k, r| {
        let mut choice = WindowChoice { a_tilde: 0, offsets: Vec::new(), bounds: Vec::new() };
        for a in 0..=cfg.max_a {
            let shift = a as SignedTick * ctx.t[k];
            let Some((value, x)) = grid_min(shift + ctx.d[k], steps[k], |x| ctx.rtilde_var(k, a as SignedTick, x, r))
            else {
                return TaskOutcome::Fail;
            };
            if value > ctx.d[k] {
                return TaskOutcome::Fail;
            }
            choice.offsets.push(x as Tick);
            choice.bounds.push(value);
            if value <= ctx.t[k] {
                choice.a_tilde = a;
                let worst = *choice.bounds.iter().max().expect("at least a = 0 evaluated");
                return TaskOutcome::Pass(worst, choice);
            }
        }
        TaskOutcome::Fail
    });

    Ok(AnalysisResult {
        verdict,
        bounds: WcrtBounds::new(to_ticks(&r_tilde)),
        offsets: ChosenOffsets::Variable(choices),
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{rtilde_fixed, test_fixed};
    use crate::policy::{derive_priority_points, PriorityPolicy};
    use num::rational::Ratio;
    use proptest::prelude::*;

    fn oracle(k: usize, a: i64, x: i64, r: &[i64], ts: &TaskSet, pa: &PriorityAssignment) -> i64 {
        let ceil = |n: i64, d: i64| Ratio::new(n, d).ceil().to_integer();
        let tk = ts[k];
        let (dk, tkp) = (tk.deadline as i64, tk.min_interarrival as i64);
        let mut total = (a + 1).min(ceil(dk - x + a * tkp, tkp)) * (tk.wcet + tk.max_suspension) as i64;
        for (i, ti) in ts.iter().enumerate() {
            if i != k {
                let g = (dk - ti.wcet as i64).min(pa[k] - pa[i]);
                total += ceil(g + r[i] - x + a * tkp, ti.min_interarrival as i64).max(0) * ti.wcet as i64;
            }
        }
        total + x - a * tkp
    }

    #[test]
    fn rtilde_var_examples() {
        let ts = TaskSet::from_tuples(&[(1, 0, 3, 2)]).unwrap();
        let pa = PriorityAssignment::new(vec![3]);
        let bounds = WcrtBounds::new(vec![3]);
        assert_eq!(rtilde_var(0, 1, 2, &bounds, &ts, &pa).unwrap(), 2);
        assert_eq!(oracle(0, 1, 2, &[3], &ts, &pa), 2);
        assert_eq!(rtilde_var(0, 1, 0, &bounds, &ts, &pa).unwrap(), 0);
        assert_eq!(oracle(0, 1, 0, &[3], &ts, &pa), 0);
        assert!(rtilde_var(0, 1, 5, &bounds, &ts, &pa).is_err());
    }

    #[test]
    fn single_task_is_accepted_at_a_zero() {
        let ts = TaskSet::from_tuples(&[(1, 0, 2, 2)]).unwrap();
        let res = test_variable(&ts, &PriorityAssignment::new(vec![2]), &TestConfig::default()).unwrap();
        assert!(res.verdict);
        assert_eq!(res.bounds.r_tilde, vec![1]);
        match res.offsets {
            ChosenOffsets::Variable(v) => assert_eq!(v[0].as_ref().unwrap().a_tilde, 0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn bound_between_period_and_deadline_is_rejected() {
        // R̃^a = 5 + a: above T = 4 until it passes D = 8 at a = 4.
        let ts = TaskSet::from_tuples(&[(5, 0, 8, 4)]).unwrap();
        let res = test_variable(&ts, &PriorityAssignment::new(vec![8]), &TestConfig::default()).unwrap();
        assert!(!res.verdict);
        assert_eq!(res.bounds.r_tilde, vec![8]);
    }

    #[test]
    fn constrained_bound_above_deadline_is_not_accepted_below_period() {
        // D = 3 < T = 10: R̃^0 = 4 is <= T but exceeds D, so the task fails.
        let ts = TaskSet::from_tuples(&[(2, 2, 3, 10)]).unwrap();
        let pa = PriorityAssignment::new(vec![3]);
        let res = test_variable(&ts, &pa, &TestConfig::default()).unwrap();
        assert!(!res.verdict);
        assert_eq!(
            res,
            AnalysisResult { offsets: res.offsets.clone(), ..test_fixed(&ts, &pa, &TestConfig::default()).unwrap() }
        );
    }

    fn small_set(constrained: bool) -> impl Strategy<Value = (TaskSet, Vec<i64>)> {
        prop::collection::vec((2u64..30, 0u64..10, 0u64..8, 0u64..30), 1..5).prop_flat_map(move |raw| {
            let tasks: Vec<_> = raw
                .iter()
                .map(|&(t, c, s, extra)| {
                    let d = if constrained { t - extra % t } else { t + extra };
                    (c.min(d), s, d, t)
                })
                .collect();
            let n = tasks.len();
            (Just(TaskSet::from_tuples(&tasks).unwrap()), prop::collection::vec(-30i64..60, n))
        })
    }

    proptest! {
        #[test]
        fn zero_window_shift_reduces_to_fixed((ts, pp) in small_set(false)) {
            // Equal whenever at most one own job fits in the window; otherwise
            // the variable form charges a single job and is smaller.
            let pa = PriorityAssignment::new(pp);
            let bounds = WcrtBounds::from_deadlines(&ts);
            for k in 0..ts.len() {
                for x in 0..ts[k].deadline {
                    let var = rtilde_var(k, 0, x, &bounds, &ts, &pa).unwrap();
                    let fixed = rtilde_fixed(k, x, &bounds, &ts, &pa).unwrap() as i64;
                    if ts[k].deadline - x <= ts[k].min_interarrival {
                        prop_assert_eq!(var, fixed);
                    } else {
                        prop_assert!(var <= fixed);
                    }
                }
            }
        }

        #[test]
        fn zero_window_shift_equals_fixed_when_constrained((ts, pp) in small_set(true)) {
            let pa = PriorityAssignment::new(pp);
            let bounds = WcrtBounds::from_deadlines(&ts);
            for k in 0..ts.len() {
                for x in 0..ts[k].deadline {
                    prop_assert_eq!(
                        rtilde_var(k, 0, x, &bounds, &ts, &pa).unwrap(),
                        rtilde_fixed(k, x, &bounds, &ts, &pa).unwrap() as i64
                    );
                }
            }
        }

        #[test]
        fn implementation_matches_oracle((ts, pp) in small_set(false), a in 0u32..4) {
            let pa = PriorityAssignment::new(pp);
            let bounds = WcrtBounds::from_deadlines(&ts);
            let r: Vec<i64> = bounds.r_tilde.iter().map(|&v| v as i64).collect();
            for k in 0..ts.len() {
                let limit = a as u64 * ts[k].min_interarrival + ts[k].deadline;
                for x in 0..limit {
                    prop_assert_eq!(rtilde_var(k, a, x, &bounds, &ts, &pa).unwrap(), oracle(k, a as i64, x as i64, &r, &ts, &pa));
                }
            }
        }

        #[test]
        fn constrained_sets_coincide_with_fixed((ts, _pp) in small_set(true)) {
            let pa = derive_priority_points(&ts, &PriorityPolicy::Edf).unwrap();
            let cfg = TestConfig::default();
            let fixed = test_fixed(&ts, &pa, &cfg).unwrap();
            let var = test_variable(&ts, &pa, &cfg).unwrap();
            prop_assert_eq!(fixed.verdict, var.verdict);
            prop_assert_eq!(fixed.bounds, var.bounds);
            prop_assert_eq!(fixed.iterations, var.iterations);
        }
    }
}
