//! Suspension-aware response-time analysis for EDF-like scheduling.
//!
//! Two sufficient tests share the same interference bounds:
//!
//! * the **fixed analysis window** test ([`test_fixed`]) looks at a window
//!   that starts `b` ticks after the release of the job under analysis and
//!   ends at its deadline;
//! * the **variable analysis window** test ([`test_variable`]) lets the
//!   window start up to `a` periods earlier, inside an active interval of the
//!   task, and charges at most `a + 1` jobs of the task itself.
//!
//! Both return `true` only when the task set is schedulable; `false` means
//! "no decision". Response-time bounds of different tasks depend on each
//! other, so both tests sweep the task list `depth` times, tightening the
//! bounds as they go.

mod baseline;
mod bounds;
mod fixed;
mod variable;

pub use baseline::baseline_susp_obl;
pub use bounds::{bound_b1, bound_b2, bound_b2_deadline, bound_b2_release, g_term};
pub use fixed::{rtilde_fixed, test_fixed, test_tfp};
pub use variable::{rtilde_var, test_variable};

use std::fmt::Write as _;

use num::rational::Ratio;

use crate::error::{Error, Result};
use crate::model::TaskSet;
use crate::policy::PriorityAssignment;
use crate::time::{ceil_div, round_half_up, SignedTick, Tick};

/// Per-task response-time upper bounds `R̃_i`, indexed by task id.
///
/// Every entry stays within `[0, D_i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WcrtBounds {
    pub r_tilde: Vec<Tick>,
}

impl WcrtBounds {
    /// The starting point of both tests: `R̃_i = D_i`.
    pub fn from_deadlines(ts: &TaskSet) -> Self {
        WcrtBounds { r_tilde: ts.iter().map(|t| t.deadline).collect() }
    }

    pub fn new(r_tilde: Vec<Tick>) -> Self {
        WcrtBounds { r_tilde }
    }
}

/// Search parameters shared by both tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestConfig {
    /// Grid step as a share of `D_k`, in `(0, 1]`.
    pub eta: Ratio<u64>,
    /// Number of passes over the task list.
    pub depth: u32,
    /// Largest active-interval length tried by the variable-window test.
    pub max_a: u32,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig { eta: Ratio::new(1, 100), depth: 5, max_a: 10 }
    }
}

impl TestConfig {
    pub fn new(eta: Ratio<u64>, depth: u32, max_a: u32) -> Result<Self> {
        if *eta.numer() == 0 || eta > Ratio::from_integer(1) {
            return Err(Error::Parse(format!("eta must lie in (0, 1], got {eta}")));
        }
        if depth == 0 {
            return Err(Error::Parse("depth must be positive".into()));
        }
        Ok(TestConfig { eta, depth, max_a })
    }

    /// Candidate spacing for a task with relative deadline `deadline`:
    /// `max(1, round(η·D))` ticks.
    pub fn step(&self, deadline: Tick) -> Tick {
        let scaled =
            Ratio::new(*self.eta.numer() as i128, *self.eta.denom() as i128) * Ratio::from_integer(deadline as i128);
        (round_half_up(scaled) as Tick).max(1)
    }
}

/// The window chosen for one task by the variable-window test.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WindowChoice {
    /// Smallest `a` whose bound fell to `T_k` or below.
    pub a_tilde: u32,
    /// Best offset `b^a_k` for `a = 0..=a_tilde`.
    pub offsets: Vec<Tick>,
    /// The minimised bound `R̃^a_k` for `a = 0..=a_tilde`.
    pub bounds: Vec<SignedTick>,
}

/// Offsets behind the final bounds. `None` for tasks whose last evaluation
/// failed or never happened.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChosenOffsets {
    Fixed(Vec<Option<Tick>>),
    Variable(Vec<Option<WindowChoice>>),
}

/// Outcome of a schedulability test.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnalysisResult {
    /// `true`: schedulable. `false`: no decision.
    pub verdict: bool,
    pub bounds: WcrtBounds,
    pub offsets: ChosenOffsets,
    /// Passes over the task list actually executed. The search stops before
    /// `depth` once a pass leaves every bound unchanged.
    pub iterations: u32,
}

impl AnalysisResult {
    /// `taskset_id,policy,verdict,iterations,R1,...,Rn`
    pub fn to_csv_row(&self, taskset_id: &str, policy: &str) -> String {
        let mut row = String::new();
        let _ = write!(row, "{},{},{},{}", csv_field(taskset_id), csv_field(policy), self.verdict, self.iterations);
        for r in &self.bounds.r_tilde {
            let _ = write!(row, ",{r}");
        }
        row
    }

    /// Header matching [`to_csv_row`](Self::to_csv_row) for `n` tasks.
    pub fn csv_header(n: usize) -> String {
        let mut header = String::from("taskset_id,policy,verdict,iterations");
        for i in 1..=n {
            let _ = write!(header, ",R{i}");
        }
        header
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Task parameters widened to signed ticks, with `G_k^i` precomputed.
pub(crate) struct Context {
    pub c: Vec<SignedTick>,
    pub s: Vec<SignedTick>,
    pub d: Vec<SignedTick>,
    pub t: Vec<SignedTick>,
    /// `g[k][i] = min(D_k - C_i, Π_k - Π_i)`; the diagonal is unused.
    pub g: Vec<Vec<SignedTick>>,
}

impl Context {
    pub fn new(ts: &TaskSet, pa: &PriorityAssignment) -> Result<Self> {
        pa.check_len(ts)?;
        let n = ts.len();
        let c: Vec<_> = ts.iter().map(|t| t.wcet as SignedTick).collect();
        let s: Vec<_> = ts.iter().map(|t| t.max_suspension as SignedTick).collect();
        let d: Vec<_> = ts.iter().map(|t| t.deadline as SignedTick).collect();
        let t: Vec<_> = ts.iter().map(|t| t.min_interarrival as SignedTick).collect();
        let g = (0..n).map(|k| (0..n).map(|i| (d[k] - c[i]).min(pa[k] - pa[i])).collect()).collect();
        Ok(Context { c, s, d, t, g })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    /// `Σ_{i≠k} max(⌈(G_k^i + R̃_i + offset) / T_i⌉, 0) · C_i`
    #[inline]
    pub fn interference(&self, k: usize, r_tilde: &[SignedTick], offset: SignedTick) -> SignedTick {
        let g = &self.g[k];
        let mut total = 0;
        for i in 0..self.len() {
            if i == k {
                continue;
            }
            let num = g[i] + r_tilde[i] + offset;
            if num > 0 {
                total += ceil_div(num, self.t[i]) * self.c[i];
            }
        }
        total
    }

    #[inline]
    pub fn rtilde_fixed(&self, k: usize, b: SignedTick, r_tilde: &[SignedTick]) -> SignedTick {
        ceil_div(self.d[k] - b, self.t[k]) * (self.c[k] + self.s[k]) + b + self.interference(k, r_tilde, -b)
    }

    #[inline]
    pub fn rtilde_var(&self, k: usize, a: SignedTick, x: SignedTick, r_tilde: &[SignedTick]) -> SignedTick {
        let shift = a * self.t[k];
        let own = (a + 1).min(ceil_div(self.d[k] - x + shift, self.t[k]));
        own * (self.c[k] + self.s[k]) + self.interference(k, r_tilde, shift - x) + x - shift
    }
}

/// Result of evaluating one task inside a pass.
pub(crate) enum TaskOutcome<C> {
    Pass(SignedTick, C),
    Fail,
}

/// Runs the multi-pass search shared by both tests.
///
/// Tasks are visited in non-increasing deadline order (stable by id). A
/// failing task is reset to `R̃_k = D_k` and ends the current pass; the
/// verdict is that of the last pass.
pub(crate) fn run_passes<C: Clone>(
    ctx: &Context,
    cfg: &TestConfig,
    mut eval: impl FnMut(usize, &[SignedTick]) -> TaskOutcome<C>,
) -> (bool, Vec<SignedTick>, Vec<Option<C>>, u32) {
    let n = ctx.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ctx.d[b].cmp(&ctx.d[a]));

    let mut r_tilde = ctx.d.clone();
    let mut choices: Vec<Option<C>> = vec![None; n];
    let mut solved = false;
    let mut iterations = 0;
    for _ in 0..cfg.depth {
        iterations += 1;
        solved = true;
        let before = r_tilde.clone();
        for &k in &order {
            match eval(k, &r_tilde) {
                TaskOutcome::Pass(value, choice) => {
                    r_tilde[k] = value;
                    choices[k] = Some(choice);
                }
                TaskOutcome::Fail => {
                    solved = false;
                    r_tilde[k] = ctx.d[k];
                    choices[k] = None;
                    break;
                }
            }
        }
        // Each pass is a function of the bound vector alone, so an
        // unchanged vector is a fixed point.
        if r_tilde == before {
            break;
        }
    }
    (solved, r_tilde, choices, iterations)
}

/// Minimum of `f(b)` over `b = 0, step, 2·step, … < limit`, with the first
/// minimising `b`. `None` when the grid is empty.
#[inline]
pub(crate) fn grid_min(
    limit: SignedTick,
    step: SignedTick,
    mut f: impl FnMut(SignedTick) -> SignedTick,
) -> Option<(SignedTick, SignedTick)> {
    let mut best: Option<(SignedTick, SignedTick)> = None;
    let mut b = 0;
    while b < limit {
        let v = f(b);
        if best.is_none_or(|(bv, _)| v < bv) {
            best = Some((v, b));
        }
        b += step;
    }
    best
}

pub(crate) fn to_ticks(values: &[SignedTick]) -> Vec<Tick> {
    values.iter().map(|&v| v.max(0) as Tick).collect()
}

pub(crate) fn check_index(ts: &TaskSet, k: usize) -> Result<()> {
    if k >= ts.len() {
        return Err(Error::TaskIndex(k));
    }
    Ok(())
}

pub(crate) fn check_pair(ts: &TaskSet, k: usize, i: usize) -> Result<()> {
    check_index(ts, k)?;
    check_index(ts, i)?;
    if k == i {
        return Err(Error::SameTask(k));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_matches_evaluation_setup() {
        let cfg = TestConfig::default();
        assert_eq!(cfg.eta, Ratio::new(1, 100));
        assert_eq!(cfg.depth, 5);
        assert_eq!(cfg.max_a, 10);
    }

    #[test]
    fn step_is_at_least_one_tick() {
        let cfg = TestConfig::default();
        assert_eq!(cfg.step(16), 1);
        assert_eq!(cfg.step(150), 2); // 1.5 rounds up
        assert_eq!(cfg.step(100_000), 1_000);
        assert_eq!(cfg.step(0), 1);
    }

    #[test]
    fn config_validation() {
        assert!(TestConfig::new(Ratio::new(0, 1), 5, 10).is_err());
        assert!(TestConfig::new(Ratio::new(3, 2), 5, 10).is_err());
        assert!(TestConfig::new(Ratio::new(1, 1), 0, 10).is_err());
        assert!(TestConfig::new(Ratio::new(1, 1), 1, 0).is_ok());
    }

    #[test]
    fn grid_min_picks_first_minimum() {
        let values = [5, 3, 3, 7];
        assert_eq!(grid_min(4, 1, |b| values[b as usize]), Some((3, 1)));
        assert_eq!(grid_min(0, 1, |_| 0), None);
        assert_eq!(grid_min(10, 4, |b| b), Some((0, 0)));
    }

    #[test]
    fn csv_row_layout() {
        let result = AnalysisResult {
            verdict: true,
            bounds: WcrtBounds::new(vec![1, 7]),
            offsets: ChosenOffsets::Fixed(vec![Some(0), Some(0)]),
            iterations: 2,
        };
        assert_eq!(AnalysisResult::csv_header(2), "taskset_id,policy,verdict,iterations,R1,R2");
        assert_eq!(result.to_csv_row("set-1", "edf"), "set-1,edf,true,2,1,7");
        assert_eq!(result.to_csv_row("a,b", "explicit:4,10"), "\"a,b\",\"explicit:4,10\",true,2,1,7");
    }
}
