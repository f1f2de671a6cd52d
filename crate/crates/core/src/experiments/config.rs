//! Sweep configuration and its file form.

use std::fmt;
use std::str::FromStr;

use num::rational::Ratio;
use serde::Deserialize;

use crate::analysis::TestConfig;
use crate::error::{Error, Result};
use crate::policy::PriorityPolicy;
use crate::time::parse_ratio;

use super::default_utilizations;

/// Which schedulability test a sweep column runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    Fixed,
    Variable,
    /// Suspension-oblivious: suspension charged as execution, then `Fixed`.
    Baseline,
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Fixed => "fixed",
            TestKind::Variable => "variable",
            TestKind::Baseline => "baseline",
        })
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fixed" => Ok(TestKind::Fixed),
            "variable" => Ok(TestKind::Variable),
            "baseline" => Ok(TestKind::Baseline),
            other => Err(Error::Parse(format!("unknown test {other:?} (expected fixed, variable or baseline)"))),
        }
    }
}

/// A named column of a sweep: policy plus test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicySpec {
    pub name: String,
    pub policy: PriorityPolicy,
    pub test: TestKind,
}

impl PolicySpec {
    /// Named `<policy>/<test>`.
    pub fn new(policy: PriorityPolicy, test: TestKind) -> Self {
        PolicySpec { name: format!("{policy}/{test}"), policy, test }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    /// Used in the output file name.
    pub name: String,
    pub utilizations: Vec<Ratio<u64>>,
    pub sets_per_point: usize,
    /// Tasks per set.
    pub n: usize,
    pub policies: Vec<PolicySpec>,
    pub deadline_factors: Vec<Ratio<u64>>,
    pub test_config: TestConfig,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            name: "sweep".into(),
            utilizations: default_utilizations(),
            sets_per_point: 100,
            n: 10,
            policies: vec![PolicySpec::new(PriorityPolicy::Edf, TestKind::Fixed)],
            deadline_factors: vec![Ratio::from_integer(1)],
            test_config: TestConfig::default(),
            master_seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Parse(format!("sweep config: {msg}")));
        if self.sets_per_point == 0 {
            return bad("sets_per_point must be at least 1");
        }
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if self.utilizations.is_empty() || self.utilizations.iter().any(|u| *u.numer() == 0) {
            return bad("utilizations must be non-empty and positive");
        }
        if self.deadline_factors.is_empty() || self.deadline_factors.iter().any(|x| *x < Ratio::from_integer(1)) {
            return bad("deadline factors must be non-empty and at least 1");
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad("name must be non-empty and free of path separators");
        }
        Ok(())
    }
}

/// File form of [`SweepConfig`]; every field is optional and defaults to
/// the desk-scale setup. Rationals are written as strings (`"1.2"`, `"1/100"`).
///
/// ```toml
/// name = "edf"
/// master_seed = 7
/// utilizations_percent = [10, 50, 90]
/// sets_per_point = 20
/// deadline_factors = ["1", "1.5"]
///
/// [[policies]]
/// policy = "edf"
/// test = "variable"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub name: Option<String>,
    pub master_seed: Option<u64>,
    pub utilizations_percent: Option<Vec<u64>>,
    pub sets_per_point: Option<usize>,
    pub n: Option<usize>,
    pub deadline_factors: Option<Vec<String>>,
    pub eta: Option<String>,
    pub depth: Option<u32>,
    pub max_a: Option<u32>,
    pub policies: Option<Vec<PolicyEntry>>,
    /// λ values for λ sweeps; ignored by plain sweeps.
    pub lambdas: Option<Vec<i64>>,
    /// `eqdf` or `saedf`, for λ sweeps.
    pub family: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEntry {
    pub name: Option<String>,
    pub policy: String,
    pub test: Option<String>,
}

fn unsigned_ratio(text: &str) -> Result<Ratio<u64>> {
    let r = parse_ratio(text)?;
    if *r.numer() < 0 {
        return Err(Error::Parse(format!("expected a non-negative number, got {text:?}")));
    }
    Ok(Ratio::new(*r.numer() as u64, *r.denom() as u64))
}

impl SweepFile {
    pub fn into_config(self) -> Result<SweepConfig> {
        let defaults = SweepConfig::default();
        let eta = self.eta.as_deref().map(unsigned_ratio).transpose()?.unwrap_or(defaults.test_config.eta);
        let test_config = TestConfig::new(
            eta,
            self.depth.unwrap_or(defaults.test_config.depth),
            self.max_a.unwrap_or(defaults.test_config.max_a),
        )?;
        let policies = match self.policies {
            None => defaults.policies,
            Some(entries) => entries
                .into_iter()
                .map(|e| {
                    let policy: PriorityPolicy = e.policy.parse()?;
                    let test = e.test.as_deref().map(str::parse).transpose()?.unwrap_or(TestKind::Fixed);
                    let mut spec = PolicySpec::new(policy, test);
                    if let Some(name) = e.name {
                        spec.name = name;
                    }
                    Ok(spec)
                })
                .collect::<Result<_>>()?,
        };
        let cfg = SweepConfig {
            name: self.name.unwrap_or(defaults.name),
            utilizations: match self.utilizations_percent {
                Some(p) => p.into_iter().map(|p| Ratio::new(p, 100)).collect(),
                None => defaults.utilizations,
            },
            sets_per_point: self.sets_per_point.unwrap_or(defaults.sets_per_point),
            n: self.n.unwrap_or(defaults.n),
            policies,
            deadline_factors: match self.deadline_factors {
                Some(xs) => xs.iter().map(|x| unsigned_ratio(x)).collect::<Result<_>>()?,
                None => defaults.deadline_factors,
            },
            test_config,
            master_seed: self.master_seed.unwrap_or(defaults.master_seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(SweepFile::default().into_config().unwrap(), SweepConfig::default());
    }

    #[test]
    fn fields_are_converted() {
        let file = SweepFile {
            name: Some("arb".into()),
            utilizations_percent: Some(vec![10, 50]),
            deadline_factors: Some(vec!["1.5".into()]),
            eta: Some("1/50".into()),
            policies: Some(vec![PolicyEntry { name: None, policy: "eqdf:-2".into(), test: Some("variable".into()) }]),
            ..Default::default()
        };
        let cfg = file.into_config().unwrap();
        assert_eq!(cfg.utilizations, vec![Ratio::new(1, 10), Ratio::new(1, 2)]);
        assert_eq!(cfg.deadline_factors, vec![Ratio::new(3, 2)]);
        assert_eq!(cfg.test_config.eta, Ratio::new(1, 50));
        assert_eq!(cfg.policies[0].policy, PriorityPolicy::Eqdf(Ratio::from_integer(-2)));
        assert_eq!(cfg.policies[0].test, TestKind::Variable);
        assert_eq!(cfg.policies[0].name, "eqdf:-2/variable");
    }

    #[test]
    fn invalid_files_are_rejected() {
        let with = |f: SweepFile| f.into_config().is_err();
        assert!(with(SweepFile { sets_per_point: Some(0), ..Default::default() }));
        assert!(with(SweepFile { deadline_factors: Some(vec!["0.5".into()]), ..Default::default() }));
        assert!(with(SweepFile { utilizations_percent: Some(vec![0]), ..Default::default() }));
        assert!(with(SweepFile { eta: Some("2".into()), ..Default::default() }));
        assert!(with(SweepFile { name: Some("a/b".into()), ..Default::default() }));
        let bad_test = PolicyEntry { name: None, policy: "edf".into(), test: Some("exact".into()) };
        assert!(with(SweepFile { policies: Some(vec![bad_test]), ..Default::default() }));
    }
}
