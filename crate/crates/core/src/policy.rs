//! Relative priority points and the EDF-like policies that induce them.
//!
//! A job released at `r` by task `i` gets the absolute priority point
//! `r + Π_i`; smaller is more urgent. Choosing the per-task offsets `Π`
//! recovers EDF, FIFO, EQDF, suspension-aware EDF, and (for schedulable
//! sets) any task-level fixed-priority order.

use std::fmt;
use std::str::FromStr;

use num::rational::Ratio;

use crate::error::{Error, Result};
use crate::model::TaskSet;
use crate::time::{parse_ratio, round_half_up, SignedTick, Tick};

/// How relative priority points are derived from a task set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PriorityPolicy {
    /// `Π_i = D_i`.
    Edf,
    /// `Π_i = 0`.
    Fifo,
    /// `Π_i = D_i + λ·C_i`, rounded to the nearest tick.
    Eqdf(Ratio<i64>),
    /// `Π_i = D_i + λ·S_i`, rounded to the nearest tick.
    Saedf(Ratio<i64>),
    /// Task-level fixed priority in list order (index 0 highest):
    /// `Π_i = D_0 + … + D_i`.
    TfpEmulation,
    /// Deadline-monotonic fixed priority: prefix sums of `D` taken in
    /// non-decreasing deadline order (stable by index).
    DeadlineMonotonic,
    /// Offsets given verbatim.
    Explicit(Vec<SignedTick>),
}

/// One relative priority point per task, indexed by task id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PriorityAssignment {
    pub pp: Vec<SignedTick>,
}

impl PriorityAssignment {
    pub fn new(pp: Vec<SignedTick>) -> Self {
        PriorityAssignment { pp }
    }

    pub fn len(&self) -> usize {
        self.pp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pp.is_empty()
    }

    pub fn check_len(&self, ts: &TaskSet) -> Result<()> {
        if self.pp.len() != ts.len() {
            return Err(Error::AssignmentLength { expected: ts.len(), got: self.pp.len() });
        }
        Ok(())
    }

    /// Adds `delta` to every offset. Pairwise job priorities are unchanged.
    pub fn shifted(&self, delta: SignedTick) -> Self {
        PriorityAssignment { pp: self.pp.iter().map(|p| p + delta).collect() }
    }
}

impl std::ops::Index<usize> for PriorityAssignment {
    type Output = SignedTick;

    fn index(&self, i: usize) -> &SignedTick {
        &self.pp[i]
    }
}

/// Absolute priority point of a job released at `release`.
#[inline]
pub fn job_priority_point(release: Tick, relative: SignedTick) -> SignedTick {
    release as SignedTick + relative
}

fn scaled_offset(deadline: Tick, lambda: Ratio<i64>, weight: Tick) -> SignedTick {
    let value = Ratio::from_integer(deadline as i128)
        + Ratio::new(*lambda.numer() as i128, *lambda.denom() as i128) * Ratio::from_integer(weight as i128);
    round_half_up(value) as SignedTick
}

fn prefix_deadline_sums(ts: &TaskSet, order: &[usize]) -> Vec<SignedTick> {
    let mut pp = vec![0; ts.len()];
    let mut acc: SignedTick = 0;
    for &id in order {
        acc += ts[id].deadline as SignedTick;
        pp[id] = acc;
    }
    pp
}

/// Computes the relative priority points `pol` assigns to `ts`.
pub fn derive_priority_points(ts: &TaskSet, pol: &PriorityPolicy) -> Result<PriorityAssignment> {
    if ts.is_empty() {
        return Err(Error::EmptyTaskSet);
    }
    let tasks = ts.tasks();
    let pp = match pol {
        PriorityPolicy::Edf => tasks.iter().map(|t| t.deadline as SignedTick).collect(),
        PriorityPolicy::Fifo => vec![0; tasks.len()],
        PriorityPolicy::Eqdf(l) => tasks.iter().map(|t| scaled_offset(t.deadline, *l, t.wcet)).collect(),
        PriorityPolicy::Saedf(l) => tasks.iter().map(|t| scaled_offset(t.deadline, *l, t.max_suspension)).collect(),
        PriorityPolicy::TfpEmulation => prefix_deadline_sums(ts, &(0..ts.len()).collect::<Vec<_>>()),
        PriorityPolicy::DeadlineMonotonic => prefix_deadline_sums(ts, &deadline_monotonic_order(ts)),
        PriorityPolicy::Explicit(pp) => {
            let pa = PriorityAssignment::new(pp.clone());
            pa.check_len(ts)?;
            return Ok(pa);
        }
    };
    Ok(PriorityAssignment { pp })
}

/// Task ids sorted by non-decreasing deadline, ties by id.
pub fn deadline_monotonic_order(ts: &TaskSet) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ts.len()).collect();
    order.sort_by_key(|&i| ts[i].deadline);
    order
}

impl fmt::Display for PriorityPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorityPolicy::Edf => f.write_str("edf"),
            PriorityPolicy::Fifo => f.write_str("fifo"),
            PriorityPolicy::Eqdf(l) => write!(f, "eqdf:{l}"),
            PriorityPolicy::Saedf(l) => write!(f, "saedf:{l}"),
            PriorityPolicy::TfpEmulation => f.write_str("tfp"),
            PriorityPolicy::DeadlineMonotonic => f.write_str("dm"),
            PriorityPolicy::Explicit(pp) => {
                let list: Vec<String> = pp.iter().map(|p| p.to_string()).collect();
                write!(f, "explicit:{}", list.join(","))
            }
        }
    }
}

impl FromStr for PriorityPolicy {
    type Err = Error;

    /// Accepts `edf`, `fifo`, `tfp`, `dm`, `eqdf:<λ>`, `saedf:<λ>` and
    /// `explicit:<Π_0>,<Π_1>,…`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let need_arg = || arg.ok_or_else(|| Error::Parse(format!("policy {name:?} needs an argument")));
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("edf", None) => Ok(PriorityPolicy::Edf),
            ("fifo", None) => Ok(PriorityPolicy::Fifo),
            ("tfp", None) => Ok(PriorityPolicy::TfpEmulation),
            ("dm", None) => Ok(PriorityPolicy::DeadlineMonotonic),
            ("eqdf", _) => Ok(PriorityPolicy::Eqdf(parse_ratio(need_arg()?)?)),
            ("saedf", _) => Ok(PriorityPolicy::Saedf(parse_ratio(need_arg()?)?)),
            ("explicit", _) => Ok(PriorityPolicy::Explicit(parse_points(need_arg()?)?)),
            _ => Err(Error::Parse(format!("unknown priority policy {s:?}"))),
        }
    }
}

/// Parses a comma-separated list of signed tick offsets.
pub fn parse_points(list: &str) -> Result<Vec<SignedTick>> {
    list.split(',')
        .map(|p| p.trim().parse::<SignedTick>().map_err(|_| Error::Parse(format!("bad priority point {p:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> TaskSet {
        TaskSet::from_tuples(&[(2, 0, 5, 5), (7, 3, 16, 16)]).unwrap()
    }

    #[test]
    fn derive_examples() {
        let ts = two();
        assert_eq!(derive_priority_points(&ts, &PriorityPolicy::Edf).unwrap().pp, vec![5, 16]);
        assert_eq!(derive_priority_points(&ts, &PriorityPolicy::Fifo).unwrap().pp, vec![0, 0]);
        assert_eq!(derive_priority_points(&ts, &PriorityPolicy::TfpEmulation).unwrap().pp, vec![5, 21]);
        assert_eq!(derive_priority_points(&TaskSet::default(), &PriorityPolicy::Edf), Err(Error::EmptyTaskSet));
    }

    #[test]
    fn scaled_policies_round_half_up() {
        let ts = two();
        // 5 + 1/2 * 2 = 6, 16 + 1/2 * 7 = 19.5 -> 20
        let eqdf = derive_priority_points(&ts, &PriorityPolicy::Eqdf(Ratio::new(1, 2))).unwrap();
        assert_eq!(eqdf.pp, vec![6, 20]);
        // 16 - 10 * 3 = -14
        let saedf = derive_priority_points(&ts, &PriorityPolicy::Saedf(Ratio::from_integer(-10))).unwrap();
        assert_eq!(saedf.pp, vec![5, -14]);
        // 16 - 1/2 * 7 = 12.5 -> 13 (ties go up)
        let eqdf = derive_priority_points(&ts, &PriorityPolicy::Eqdf(Ratio::new(-1, 2))).unwrap();
        assert_eq!(eqdf.pp, vec![4, 13]);
    }

    #[test]
    fn deadline_monotonic_uses_sorted_prefix_sums() {
        let ts = TaskSet::from_tuples(&[(1, 0, 16, 16), (1, 0, 5, 5), (1, 0, 5, 8)]).unwrap();
        let pa = derive_priority_points(&ts, &PriorityPolicy::DeadlineMonotonic).unwrap();
        assert_eq!(pa.pp, vec![26, 5, 10]);
    }

    #[test]
    fn explicit_length_checked() {
        let ts = two();
        assert!(derive_priority_points(&ts, &PriorityPolicy::Explicit(vec![1])).is_err());
        assert_eq!(derive_priority_points(&ts, &PriorityPolicy::Explicit(vec![4, 10])).unwrap().pp, vec![4, 10]);
    }

    #[test]
    fn job_priority_point_examples() {
        assert_eq!(job_priority_point(10, 4), 14);
        assert_eq!(job_priority_point(0, 0), 0);
        assert_eq!(job_priority_point(0, 10), 10);
    }

    #[test]
    fn policy_strings() {
        for s in ["edf", "fifo", "tfp", "dm", "eqdf:-3", "saedf:1/2", "explicit:4,10"] {
            let p: PriorityPolicy = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("eqdf".parse::<PriorityPolicy>().is_err());
        assert!("bogus".parse::<PriorityPolicy>().is_err());
    }
}
