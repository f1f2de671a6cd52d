//! Wall-clock cost of the fixed-window test.

use std::time::Instant;

use num::rational::Ratio;
use serde::Serialize;

use crate::analysis::{test_fixed, TestConfig};
use crate::error::Result;
use crate::generator::{synthesize, GenSpec};
use crate::policy::{derive_priority_points, PriorityPolicy};

use super::cell_seed;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub sets: usize,
    pub mean_seconds: f64,
    pub max_seconds: f64,
}

/// Times `test_fixed` under EDF with `cfg` on `reps` sets per utilization for
/// every `n`. Runs on the calling thread so timings are not shared.
pub fn runtime_benchmark(
    n_list: &[usize],
    utilizations: &[Ratio<u64>],
    reps: usize,
    seed: u64,
    cfg: &TestConfig,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut times = Vec::with_capacity(utilizations.len() * reps);
        for &u in utilizations {
            for i in 0..reps as u64 {
                let spec = GenSpec::new(n, u, cell_seed(seed, u, Ratio::from_integer(n as u64), i));
                let ts = synthesize(&spec)?.taskset;
                let pa = derive_priority_points(&ts, &PriorityPolicy::Edf)?;
                let start = Instant::now();
                std::hint::black_box(test_fixed(&ts, &pa, cfg)?);
                times.push(start.elapsed().as_secs_f64());
            }
        }
        let sets = times.len();
        let mean = if sets == 0 { 0.0 } else { times.iter().sum::<f64>() / sets as f64 };
        rows.push(BenchRow { n, sets, mean_seconds: mean, max_seconds: times.iter().copied().fold(0.0, f64::max) });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_per_size() {
        let rows = runtime_benchmark(&[1, 5], &[Ratio::new(1, 2)], 3, 1, &TestConfig::default()).unwrap();
        assert_eq!(rows.iter().map(|r| (r.n, r.sets)).collect::<Vec<_>>(), vec![(1, 3), (5, 3)]);
        assert!(rows.iter().all(|r| r.max_seconds >= r.mean_seconds && r.mean_seconds >= 0.0));
        assert!(rows[0].mean_seconds < 1e-3);
    }

    #[test]
    fn cost_grows_faster_than_n() {
        let sizes = [10, 50, 100, 200];
        let utils: Vec<Ratio<u64>> = [3, 5, 7, 9].iter().map(|&p| Ratio::new(p, 10)).collect();
        // Best of three runs, to shed cold caches and scheduler noise.
        let mut means = [f64::INFINITY; 4];
        for _ in 0..3 {
            for (m, r) in means.iter_mut().zip(runtime_benchmark(&sizes, &utils, 5, 3, &TestConfig::default()).unwrap())
            {
                *m = m.min(r.mean_seconds);
            }
        }
        assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
        // 20 times the tasks, far more than 20 times the time.
        assert!(means[3] > 40.0 * means[0], "{means:?}");
    }
}
