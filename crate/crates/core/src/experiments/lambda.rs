//! λ sweeps for the EQDF and SAEDF families.

use std::fmt;
use std::str::FromStr;

use num::rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::{synthesize, GenSpec};
use crate::policy::PriorityPolicy;

use super::{cell_seed, evaluate, worker_pool, PolicySpec, SweepConfig, SweepRow, TestKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LambdaFamily {
    /// `Π = D + λC`
    Eqdf,
    /// `Π = D + λS`
    Saedf,
}

impl LambdaFamily {
    pub fn policy(self, lambda: i64) -> PriorityPolicy {
        let l = Ratio::from_integer(lambda);
        match self {
            LambdaFamily::Eqdf => PriorityPolicy::Eqdf(l),
            LambdaFamily::Saedf => PriorityPolicy::Saedf(l),
        }
    }
}

impl fmt::Display for LambdaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LambdaFamily::Eqdf => "eqdf",
            LambdaFamily::Saedf => "saedf",
        })
    }
}

impl FromStr for LambdaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "eqdf" => Ok(LambdaFamily::Eqdf),
            "saedf" => Ok(LambdaFamily::Saedf),
            other => Err(Error::Parse(format!("unknown λ family {other:?} (expected eqdf or saedf)"))),
        }
    }
}

/// Rows are named `<family>:<λ>` per λ and `<family>:best` for the set-wise
/// OR over every λ. The full table is reported; no single λ is singled out.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSweep {
    pub rows: Vec<SweepRow>,
    /// Set when `λ = 0` is missing, so the best-λ column need not dominate EDF.
    pub warning: Option<String>,
}

/// The integers `-10..=10`.
pub fn default_lambdas() -> Vec<i64> {
    (-10..=10).collect()
}

/// Runs `test` for every `λ` on the sets of `cfg`'s cells; `cfg.policies`
/// is ignored.
pub fn lambda_sweep(cfg: &SweepConfig, lambdas: &[i64], family: LambdaFamily, test: TestKind) -> Result<LambdaSweep> {
    cfg.validate()?;
    if lambdas.is_empty() {
        return Err(Error::Parse("λ list is empty".into()));
    }
    let warning = (!lambdas.contains(&0))
        .then(|| "λ list lacks 0: the best-λ column is not guaranteed to dominate EDF".to_string());
    let specs: Vec<PolicySpec> =
        lambdas.iter().map(|&l| PolicySpec { name: format!("{family}:{l}"), policy: family.policy(l), test }).collect();

    let cells: Vec<(Ratio<u64>, Ratio<u64>)> =
        cfg.utilizations.iter().flat_map(|&u| cfg.deadline_factors.iter().map(move |&x| (u, x))).collect();
    let items: Vec<(usize, u64)> =
        (0..cells.len()).flat_map(|c| (0..cfg.sets_per_point as u64).map(move |i| (c, i))).collect();
    let verdicts: Vec<Vec<bool>> = worker_pool()?.install(|| {
        items
            .par_iter()
            .map(|&(c, i)| {
                let (u, x) = cells[c];
                let spec = GenSpec::new(cfg.n, u, cell_seed(cfg.master_seed, u, x, i)).with_deadline_factor(x);
                let ts = synthesize(&spec)?.taskset;
                specs.iter().map(|p| evaluate(&ts, p, &cfg.test_config)).collect()
            })
            .collect::<Result<_>>()
    })?;

    let per = cfg.sets_per_point;
    let mut rows = Vec::new();
    for (c, &(u, x)) in cells.iter().enumerate() {
        let cell = &verdicts[c * per..(c + 1) * per];
        for (p, spec) in specs.iter().enumerate() {
            let accepted = cell.iter().filter(|v| v[p]).count() as u64;
            rows.push(SweepRow::new(u, spec.name.clone(), x, accepted, per as u64));
        }
        let best = cell.iter().filter(|v| v.iter().any(|&b| b)).count() as u64;
        rows.push(SweepRow::new(u, format!("{family}:best"), x, best, per as u64));
    }
    Ok(LambdaSweep { rows, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::acceptance_sweep;

    fn small() -> SweepConfig {
        SweepConfig {
            utilizations: vec![Ratio::new(1, 2), Ratio::new(4, 5)],
            sets_per_point: 6,
            n: 5,
            master_seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn lambda_zero_alone_is_edf() {
        let cfg = small();
        let sweep = lambda_sweep(&cfg, &[0], LambdaFamily::Eqdf, TestKind::Fixed).unwrap();
        assert!(sweep.warning.is_none());
        let edf = acceptance_sweep(&cfg).unwrap();
        for (cell, e) in sweep.rows.chunks(2).zip(&edf) {
            assert_eq!(cell[0].accepted, e.accepted);
            assert_eq!(cell[1].accepted, e.accepted);
            assert_eq!(cell[1].policy, "eqdf:best");
        }
    }

    #[test]
    fn best_dominates_every_lambda() {
        let sweep = lambda_sweep(&small(), &[-2, 0, 3], LambdaFamily::Saedf, TestKind::Fixed).unwrap();
        for cell in sweep.rows.chunks(4) {
            assert!(cell[..3].iter().all(|r| r.accepted <= cell[3].accepted));
            assert_eq!(cell[0].policy, "saedf:-2");
        }
    }

    #[test]
    fn missing_zero_warns() {
        let sweep = lambda_sweep(&small(), &[1], LambdaFamily::Eqdf, TestKind::Fixed).unwrap();
        assert!(sweep.warning.is_some());
        assert!(lambda_sweep(&small(), &[], LambdaFamily::Eqdf, TestKind::Fixed).is_err());
        assert_eq!("saedf".parse::<LambdaFamily>().unwrap(), LambdaFamily::Saedf);
        assert!("edf".parse::<LambdaFamily>().is_err());
    }
}
