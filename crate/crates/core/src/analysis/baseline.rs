//! Suspension-oblivious baseline: suspension is charged as execution.

use crate::error::Result;
use crate::model::{Task, TaskSet};
use crate::policy::PriorityAssignment;

use super::{test_fixed, AnalysisResult, TestConfig};

/// Runs [`test_fixed`] on the set with every task turned into
/// `(C_i + S_i, 0, D_i, T_i)`, keeping the same priority points.
///
/// Accepting here implies acceptance by `test_fixed` on the original set,
/// since every term of the inflated bound is at least the original one.
pub fn baseline_susp_obl(ts: &TaskSet, pa: &PriorityAssignment, cfg: &TestConfig) -> Result<AnalysisResult> {
    let inflated = TaskSet::from_tasks_unchecked(
        ts.iter().map(|t| Task { wcet: t.wcet + t.max_suspension, max_suspension: 0, ..*t }).collect(),
    );
    test_fixed(&inflated, pa, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{derive_priority_points, PriorityPolicy};

    #[test]
    fn identity_without_suspension() {
        let ts = TaskSet::from_tuples(&[(1, 0, 5, 5), (2, 0, 16, 16), (3, 0, 20, 25)]).unwrap();
        let pa = derive_priority_points(&ts, &PriorityPolicy::Edf).unwrap();
        let cfg = TestConfig::default();
        assert_eq!(baseline_susp_obl(&ts, &pa, &cfg).unwrap(), test_fixed(&ts, &pa, &cfg).unwrap());
    }

    #[test]
    fn inflated_overload_is_rejected() {
        // C + S exceeds D for the second task, and U' = 1/5 + 17/16 > 1.
        let ts = TaskSet::from_tuples(&[(1, 0, 5, 5), (7, 10, 16, 16)]).unwrap();
        let pa = derive_priority_points(&ts, &PriorityPolicy::Edf).unwrap();
        assert!(!baseline_susp_obl(&ts, &pa, &TestConfig::default()).unwrap().verdict);
    }

    #[test]
    fn baseline_acceptance_implies_fixed_acceptance() {
        let ts = TaskSet::from_tuples(&[(1, 0, 5, 5), (2, 1, 16, 16)]).unwrap();
        let pa = derive_priority_points(&ts, &PriorityPolicy::Edf).unwrap();
        let cfg = TestConfig::default();
        let base = baseline_susp_obl(&ts, &pa, &cfg).unwrap();
        let fixed = test_fixed(&ts, &pa, &cfg).unwrap();
        assert!(base.verdict && fixed.verdict);
        for (b, f) in base.bounds.r_tilde.iter().zip(&fixed.bounds.r_tilde) {
            assert!(f <= b);
        }
    }
}
