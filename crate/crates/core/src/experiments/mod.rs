//! Acceptance-ratio sweeps, λ sweeps, runtime benchmarks and randomized
//! verification campaigns.
//!
//! Work items are independent and run on a rayon pool; results are
//! collected in input order, so tables do not depend on the thread count.
//! `EL_SCHED_THREADS` caps the pool size.

mod bench;
mod config;
mod lambda;
mod sweep;
mod verify;

pub use bench::{runtime_benchmark, BenchRow};
pub use config::{PolicySpec, SweepConfig, SweepFile, TestKind};
pub use lambda::{default_lambdas, lambda_sweep, LambdaFamily, LambdaSweep};
pub use sweep::{acceptance_sweep, read_csv, sweep_file_name, write_csv, SweepRow};
pub use verify::{
    find_non_dominance_pair, fixed_vs_variable_campaign, overload_campaign, partition_campaign, soundness_campaign,
    tfp_equivalence_campaign, CampaignConfig, CampaignReport, NonDominance, NonDominanceConfig, SoundnessReport,
    Witness,
};

use num::rational::Ratio;

use crate::analysis::{baseline_susp_obl, test_fixed, test_variable, TestConfig};
use crate::error::{Error, Result};
use crate::generator::splitmix64;
use crate::model::TaskSet;
use crate::policy::derive_priority_points;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "EL_SCHED_THREADS";

/// A rayon pool sized by [`THREADS_ENV`], or by rayon's default when unset.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parse(format!("cannot start worker pool: {e}")))
}

fn mix(h: u64, v: u64) -> u64 {
    splitmix64(h ^ splitmix64(v))
}

/// Seed of set `index` in the cell `(utilization, deadline_factor)`.
///
/// Every policy of a sweep evaluates the sets drawn from these seeds, so
/// ratios of different policies are paired.
pub fn cell_seed(master: u64, utilization: Ratio<u64>, deadline_factor: Ratio<u64>, index: u64) -> u64 {
    [*utilization.numer(), *utilization.denom(), *deadline_factor.numer(), *deadline_factor.denom(), index]
        .into_iter()
        .fold(splitmix64(master), mix)
}

/// Runs one configured test on `ts`.
pub fn evaluate(ts: &TaskSet, spec: &PolicySpec, cfg: &TestConfig) -> Result<bool> {
    let pa = derive_priority_points(ts, &spec.policy)?;
    let res = match spec.test {
        TestKind::Fixed => test_fixed(ts, &pa, cfg)?,
        TestKind::Variable => test_variable(ts, &pa, cfg)?,
        TestKind::Baseline => baseline_susp_obl(ts, &pa, cfg)?,
    };
    Ok(res.verdict)
}

/// `0.05, 0.10, …, 1.00`.
pub fn default_utilizations() -> Vec<Ratio<u64>> {
    (1..=20).map(|k| Ratio::new(5 * k, 100)).collect()
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_separate_cells_and_indices() {
        let u = Ratio::new(1, 2);
        let x = Ratio::from_integer(1);
        let a = cell_seed(7, u, x, 0);
        assert_eq!(a, cell_seed(7, Ratio::new(2, 4), x, 0));
        assert_ne!(a, cell_seed(7, u, x, 1));
        assert_ne!(a, cell_seed(7, u, Ratio::new(6, 5), 0));
        assert_ne!(a, cell_seed(8, u, x, 0));
    }

    #[test]
    fn default_grid() {
        let u = default_utilizations();
        assert_eq!(u.len(), 20);
        assert_eq!(u[0], Ratio::new(1, 20));
        assert_eq!(u[19], Ratio::from_integer(1));
    }
}
