//! Sporadic self-suspending tasks and task sets.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Tick;

/// A sporadic task with dynamic self-suspension.
///
/// Jobs execute for at most `wcet` ticks, suspend for at most
/// `max_suspension` ticks in total (split into any number of pieces), must
/// finish `deadline` ticks after release, and are released at least
/// `min_interarrival` ticks apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Task {
    pub wcet: Tick,
    pub max_suspension: Tick,
    pub deadline: Tick,
    pub min_interarrival: Tick,
}

impl Task {
    pub fn new(wcet: Tick, max_suspension: Tick, deadline: Tick, min_interarrival: Tick) -> Result<Self> {
        let task = Task { wcet, max_suspension, deadline, min_interarrival };
        task.validate(0)?;
        Ok(task)
    }

    /// Checks `C <= D` and `T > 0`; `id` is only used in the error.
    pub fn validate(&self, id: usize) -> Result<()> {
        if self.min_interarrival == 0 {
            return Err(Error::InvalidTask { id, reason: "minimum inter-arrival time must be positive".into() });
        }
        if self.wcet > self.deadline {
            return Err(Error::InvalidTask {
                id,
                reason: format!("WCET {} exceeds deadline {}", self.wcet, self.deadline),
            });
        }
        Ok(())
    }

    pub fn utilization(&self) -> BigRational {
        BigRational::new(BigInt::from(self.wcet), BigInt::from(self.min_interarrival))
    }

    /// Execution plus suspension budget of one job.
    pub fn demand(&self) -> Tick {
        self.wcet + self.max_suspension
    }

    pub fn is_constrained(&self) -> bool {
        self.deadline <= self.min_interarrival
    }
}

/// An ordered list of tasks; a task's id is its position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskSet {
    tasks: Vec<Task>,
}

impl TaskSet {
    /// Builds a task set, validating every task. An empty list is allowed
    /// here; operations that need tasks reject it themselves.
    pub fn new(tasks: Vec<Task>) -> Result<Self> {
        for (id, task) in tasks.iter().enumerate() {
            task.validate(id)?;
        }
        Ok(TaskSet { tasks })
    }

    /// Convenience constructor from `(C, S, D, T)` tuples.
    pub fn from_tuples(tuples: &[(Tick, Tick, Tick, Tick)]) -> Result<Self> {
        Self::new(
            tuples
                .iter()
                .map(|&(c, s, d, t)| Task { wcet: c, max_suspension: s, deadline: d, min_interarrival: t })
                .collect(),
        )
    }

    /// Skips validation. Used for derived sets (e.g. WCET inflation) whose
    /// tasks may legitimately have `C > D`.
    pub(crate) fn from_tasks_unchecked(tasks: Vec<Task>) -> Self {
        TaskSet { tasks }
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn get(&self, id: usize) -> Result<&Task> {
        self.tasks.get(id).ok_or(Error::TaskIndex(id))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Task> {
        self.tasks.iter()
    }

    /// Exact total utilization `Σ C_i / T_i`.
    pub fn utilization(&self) -> BigRational {
        self.tasks.iter().fold(BigRational::zero(), |acc, t| acc + t.utilization())
    }

    pub fn utilization_f64(&self) -> f64 {
        self.tasks.iter().map(|t| t.wcet as f64 / t.min_interarrival as f64).sum()
    }

    /// True when every task has `D <= T`.
    pub fn is_constrained(&self) -> bool {
        self.tasks.iter().all(Task::is_constrained)
    }

    pub fn max_interarrival(&self) -> Tick {
        self.tasks.iter().map(|t| t.min_interarrival).max().unwrap_or(0)
    }
}

impl std::ops::Index<usize> for TaskSet {
    type Output = Task;

    fn index(&self, id: usize) -> &Task {
        &self.tasks[id]
    }
}

impl<'a> IntoIterator for &'a TaskSet {
    type Item = &'a Task;
    type IntoIter = std::slice::Iter<'a, Task>;

    fn into_iter(self) -> Self::IntoIter {
        self.tasks.iter()
    }
}

/// Exact utilization of a task set.
pub fn utilization(ts: &TaskSet) -> BigRational {
    ts.utilization()
}

/// First line of the task-set text format.
pub const TASKSET_HEADER: &str = "# el-sched taskset v1";

impl fmt::Display for TaskSet {
    /// Writes the line-oriented text format: the header, then `C S D T` per task.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{TASKSET_HEADER}")?;
        for t in &self.tasks {
            writeln!(f, "{} {} {} {}", t.wcet, t.max_suspension, t.deadline, t.min_interarrival)?;
        }
        Ok(())
    }
}

impl FromStr for TaskSet {
    type Err = Error;

    /// Parses the text format. Blank lines and further `#` comment lines
    /// after the header are ignored.
    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, first)) if first.trim() == TASKSET_HEADER => {}
            _ => return Err(Error::Format { line: 1, reason: format!("expected header {TASKSET_HEADER:?}") }),
        }
        let mut tasks = Vec::new();
        for (idx, raw) in lines {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Format {
                    line: lineno,
                    reason: format!("expected 4 fields `C S D T`, got {}", fields.len()),
                });
            }
            let mut vals = [0 as Tick; 4];
            for (slot, field) in vals.iter_mut().zip(&fields) {
                *slot = field.parse::<Tick>().map_err(|_| Error::Format {
                    line: lineno,
                    reason: format!("{field:?} is not a non-negative integer tick count"),
                })?;
            }
            let task = Task { wcet: vals[0], max_suspension: vals[1], deadline: vals[2], min_interarrival: vals[3] };
            task.validate(tasks.len()).map_err(|e| Error::Format { line: lineno, reason: e.to_string() })?;
            tasks.push(task);
        }
        Ok(TaskSet { tasks })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> TaskSet {
        TaskSet::from_tuples(&[(2, 0, 5, 5), (7, 3, 16, 16)]).unwrap()
    }

    #[test]
    fn utilization_examples() {
        assert_eq!(fig1().utilization(), BigRational::new(67.into(), 80.into()));
        assert_eq!(TaskSet::default().utilization(), BigRational::zero());
        let full = TaskSet::from_tuples(&[(5, 0, 5, 5)]).unwrap();
        assert_eq!(full.utilization(), BigRational::from_integer(1.into()));
    }

    #[test]
    fn task_invariants() {
        assert!(Task::new(3, 0, 2, 5).is_err());
        assert!(Task::new(1, 0, 2, 0).is_err());
        assert!(Task::new(0, 0, 0, 1).is_ok());
    }

    #[test]
    fn text_format_round_trip() {
        let text = fig1().to_string();
        assert_eq!(text, "# el-sched taskset v1\n2 0 5 5\n7 3 16 16\n");
        assert_eq!(text.parse::<TaskSet>().unwrap(), fig1());
    }

    #[test]
    fn text_format_rejects_bad_input() {
        let bad = [
            "2 0 5 5\n",
            "# el-sched taskset v1\n-1 0 5 5\n",
            "# el-sched taskset v1\n1 0 5 0\n",
            "# el-sched taskset v1\n1 0 5\n",
            "# el-sched taskset v1\n6 0 5 5\n",
        ];
        for text in bad {
            assert!(text.parse::<TaskSet>().is_err(), "accepted {text:?}");
        }
    }
}
