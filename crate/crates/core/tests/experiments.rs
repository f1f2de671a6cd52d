//! Sweep-level properties on desk-scale corpora.

use el_sched::experiments::{
    acceptance_sweep, default_lambdas, lambda_sweep, LambdaFamily, PolicySpec, SweepConfig, TestKind,
};
use el_sched::PriorityPolicy;
use num::rational::Ratio;

/// Master seed of the λ sweep in the acceptance suite.
const LAMBDA_SEED: u64 = 5;

#[test]
fn eqdf_best_lambda_beats_edf_at_mid_utilization() {
    let cfg = SweepConfig {
        utilizations: (10..=14).map(|k| Ratio::new(5 * k, 100)).collect(),
        master_seed: LAMBDA_SEED,
        ..SweepConfig::default()
    };
    let sweep = lambda_sweep(&cfg, &default_lambdas(), LambdaFamily::Eqdf, TestKind::Fixed).unwrap();
    let edf = acceptance_sweep(&cfg).unwrap();
    let per_cell = default_lambdas().len() + 1;
    let mut strict = 0;
    for (cell, e) in sweep.rows.chunks(per_cell).zip(&edf) {
        let (zero, best) = (&cell[10], &cell[per_cell - 1]);
        assert_eq!((zero.policy.as_str(), best.policy.as_str()), ("eqdf:0", "eqdf:best"));
        assert_eq!(zero.accepted, e.accepted);
        assert!(best.accepted >= zero.accepted);
        strict += usize::from(best.accepted > zero.accepted);
    }
    assert!(strict > 0);
}

#[test]
fn baseline_never_beats_el_edf() {
    let cfg = SweepConfig {
        utilizations: (1..=20).map(|k| Ratio::new(5 * k, 100)).collect(),
        sets_per_point: 30,
        // Charging S as execution adds about 0.25 utilization per task, so
        // only small sets leave the baseline anything to accept.
        n: 3,
        policies: vec![
            PolicySpec::new(PriorityPolicy::Edf, TestKind::Fixed),
            PolicySpec::new(PriorityPolicy::Edf, TestKind::Baseline),
        ],
        deadline_factors: vec![Ratio::from_integer(1), Ratio::new(3, 2)],
        master_seed: 2,
        ..SweepConfig::default()
    };
    let rows = acceptance_sweep(&cfg).unwrap();
    for pair in rows.chunks(2) {
        assert!(pair[1].accepted <= pair[0].accepted, "{pair:?}");
    }
    assert!(rows.iter().any(|r| r.policy == "edf/baseline" && r.accepted > 0));
}

#[test]
fn sweeps_are_reproducible_and_paired() {
    let cfg = SweepConfig {
        utilizations: vec![Ratio::new(7, 10)],
        sets_per_point: 20,
        master_seed: 9,
        ..SweepConfig::default()
    };
    assert_eq!(acceptance_sweep(&cfg).unwrap(), acceptance_sweep(&cfg).unwrap());
    // A second column with the same policy sees the same sets.
    let twice = SweepConfig { policies: vec![cfg.policies[0].clone(), cfg.policies[0].clone()], ..cfg.clone() };
    let rows = acceptance_sweep(&twice).unwrap();
    assert_eq!(rows[0].accepted, rows[1].accepted);
}
