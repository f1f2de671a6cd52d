//! Interference bounds for a job `τ_{k,ℓ}` over a window `[c, d_{k,ℓ})`.
//!
//! `offset` always stands for `r_{k,ℓ} - c`, the (signed) distance from the
//! window start back to the release of the job under analysis.

use crate::error::Result;
use crate::model::TaskSet;
use crate::policy::PriorityAssignment;
use crate::time::{ceil_div, SignedTick, Tick};

use super::{check_index, check_pair};

/// `G_k^i = min(D_k - C_i, Π_k - Π_i)`. May be negative.
pub fn g_term(k: usize, i: usize, ts: &TaskSet, pa: &PriorityAssignment) -> Result<SignedTick> {
    check_pair(ts, k, i)?;
    pa.check_len(ts)?;
    let (tk, ti) = (&ts[k], &ts[i]);
    Ok((tk.deadline as SignedTick - ti.wcet as SignedTick).min(pa[k] - pa[i]))
}

/// Time spent on (or suspended by) earlier jobs of `τ_k` inside a window of
/// length `window` that ends at the deadline of the job under analysis:
/// `max(⌈window / T_k⌉ - 1, 0) · (C_k + S_k)`.
pub fn bound_b1(k: usize, window: Tick, ts: &TaskSet) -> Result<Tick> {
    check_index(ts, k)?;
    let task = &ts[k];
    let jobs = ceil_div(window as SignedTick, task.min_interarrival as SignedTick) - 1;
    Ok(jobs.max(0) as Tick * task.demand())
}

fn clamped_jobs(numerator: SignedTick, period: Tick) -> Tick {
    ceil_div(numerator, period as SignedTick).max(0) as Tick
}

/// Interference of `τ_i` counted by releases that can still outrank the job
/// under analysis: `max(⌈(Π_k - Π_i + R̃_i + offset) / T_i⌉, 0) · C_i`.
pub fn bound_b2_release(
    k: usize,
    i: usize,
    r_tilde_i: Tick,
    offset: SignedTick,
    ts: &TaskSet,
    pa: &PriorityAssignment,
) -> Result<Tick> {
    check_pair(ts, k, i)?;
    pa.check_len(ts)?;
    let num = pa[k] - pa[i] + r_tilde_i as SignedTick + offset;
    Ok(clamped_jobs(num, ts[i].min_interarrival) * ts[i].wcet)
}

/// Interference of `τ_i` counted by releases that can still execute before
/// the deadline of the job under analysis:
/// `max(⌈(D_k - C_i + offset + R̃_i) / T_i⌉ · C_i, 0)`.
pub fn bound_b2_deadline(k: usize, i: usize, r_tilde_i: Tick, offset: SignedTick, ts: &TaskSet) -> Result<Tick> {
    check_pair(ts, k, i)?;
    let (tk, ti) = (&ts[k], &ts[i]);
    let num = tk.deadline as SignedTick - ti.wcet as SignedTick + offset + r_tilde_i as SignedTick;
    Ok(clamped_jobs(num, ti.min_interarrival) * ti.wcet)
}

/// The tighter of the two release counts:
/// `max(⌈(G_k^i + R̃_i + offset) / T_i⌉, 0) · C_i`.
pub fn bound_b2(
    k: usize,
    i: usize,
    r_tilde_i: Tick,
    offset: SignedTick,
    ts: &TaskSet,
    pa: &PriorityAssignment,
) -> Result<Tick> {
    let g = g_term(k, i, ts, pa)?;
    let num = g + r_tilde_i as SignedTick + offset;
    Ok(clamped_jobs(num, ts[i].min_interarrival) * ts[i].wcet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use num::rational::Ratio;
    use proptest::prelude::*;

    fn ceil_q(n: i64, d: i64) -> i64 {
        Ratio::new(n, d).ceil().to_integer()
    }

    fn fig1() -> (TaskSet, PriorityAssignment) {
        (TaskSet::from_tuples(&[(2, 0, 5, 5), (7, 3, 16, 16)]).unwrap(), PriorityAssignment::new(vec![4, 10]))
    }

    #[test]
    fn g_term_examples() {
        let (ts, pa) = fig1();
        // Oracle: re-evaluate min(D_2 - C_1, Π_2 - Π_1) by hand.
        let (slack, gap) = (16 - 2, 10 - 4);
        assert_eq!(g_term(1, 0, &ts, &pa).unwrap(), slack.min(gap));
        assert_eq!(g_term(1, 0, &ts, &pa).unwrap(), 6);
        assert_eq!(g_term(0, 1, &ts, &pa).unwrap(), -6);
        let eq = TaskSet::from_tuples(&[(3, 0, 3, 5), (1, 0, 3, 5)]).unwrap();
        assert_eq!(g_term(1, 0, &eq, &PriorityAssignment::new(vec![7, 7])).unwrap(), 0);
        assert_eq!(g_term(0, 0, &ts, &pa), Err(Error::SameTask(0)));
    }

    /// Largest number of deadlines, spaced `period` apart, that fit in a
    /// half-open window `(c, c + window]`, found by trying every phase.
    fn max_deadlines_in_window(window: i64, period: i64) -> i64 {
        (1..=period).map(|phase| (0..).take_while(|m| phase + m * period <= window).count() as i64).max().unwrap()
    }

    #[test]
    fn bound_b1_examples() {
        let ts = TaskSet::from_tuples(&[(2, 1, 5, 5)]).unwrap();
        assert_eq!(bound_b1(0, 5, &ts).unwrap(), 0);
        assert_eq!(bound_b1(0, 16, &ts).unwrap(), (max_deadlines_in_window(16, 5) - 1) as u64 * 3);
        assert_eq!(bound_b1(0, 16, &ts).unwrap(), 9);
        assert_eq!(bound_b1(0, 0, &ts).unwrap(), 0);
    }

    #[test]
    fn bound_b2_examples() {
        let (ts, pa) = fig1();
        assert_eq!(bound_b2_release(1, 0, 5, 0, &ts, &pa).unwrap(), 6);
        assert_eq!(bound_b2_deadline(1, 0, 5, 0, &ts).unwrap(), 8);
        assert_eq!(bound_b2(1, 0, 5, 0, &ts, &pa).unwrap(), ceil_q(6 + 5, 5) as u64 * 2);
        assert_eq!(bound_b2(1, 0, 5, 0, &ts, &pa).unwrap(), 6);
        assert_eq!(bound_b2(0, 1, 15, 0, &ts, &pa).unwrap(), 7);
        // Numerator exactly zero.
        assert_eq!(bound_b2(1, 0, 5, -11, &ts, &pa).unwrap(), 0);
        assert_eq!(bound_b2_release(1, 0, 5, -6 - 5, &ts, &pa).unwrap(), 0);

        let far = PriorityAssignment::new(vec![24, 4]); // Π_k - Π_i = -20 for k=1, i=0
        assert_eq!(bound_b2_release(1, 0, 5, 0, &ts, &far).unwrap(), 0);

        let zero_c = TaskSet::from_tuples(&[(0, 0, 5, 5), (7, 3, 16, 16)]).unwrap();
        assert_eq!(bound_b2_deadline(1, 0, 5, 0, &zero_c).unwrap(), 0);
        assert_eq!(bound_b2_deadline(1, 0, 5, -30, &ts).unwrap(), 0);
    }

    /// Brute-force count of releases with spacing at least `period` in the
    /// half-open interval `(lo, hi]`, maximised over the first release.
    fn max_releases(lo: i64, hi: i64, period: i64) -> i64 {
        if hi <= lo {
            return 0;
        }
        (lo + 1..=lo + period).map(|first| (0..).take_while(|m| first + m * period <= hi).count() as i64).max().unwrap()
    }

    proptest! {
        #[test]
        fn b2_is_tighter_than_both_counts(
            ck in 0u64..20, dk in 20u64..60, ci in 0u64..20, ti in 1u64..40,
            pk in -50i64..50, pi in -50i64..50, r in 0u64..60, offset in -80i64..40,
        ) {
            let ts = TaskSet::from_tuples(&[(ci, 0, 20, ti), (ck, 0, dk, 30)]).unwrap();
            let pa = PriorityAssignment::new(vec![pi, pk]);
            let b2 = bound_b2(1, 0, r, offset, &ts, &pa).unwrap();
            prop_assert!(b2 <= bound_b2_release(1, 0, r, offset, &ts, &pa).unwrap());
            prop_assert!(b2 <= bound_b2_deadline(1, 0, r, offset, &ts).unwrap());
            prop_assert_eq!(b2, bound_b2_release(1, 0, r, offset, &ts, &pa).unwrap()
                .min(bound_b2_deadline(1, 0, r, offset, &ts).unwrap()));
        }

        #[test]
        fn release_bound_matches_enumeration(
            delta_pp in -40i64..40, r in 0i64..40, offset in -40i64..40, ti in 1u64..15, ci in 1u64..5,
        ) {
            // Jobs of τ_i released in (c - R̃_i, r_kl + Π_k - Π_i]; put r_kl = 0.
            let c = -offset;
            let ts = TaskSet::from_tuples(&[(ci, 0, 20, ti), (1, 0, 20, 20)]).unwrap();
            let pa = PriorityAssignment::new(vec![0, delta_pp]);
            let count = max_releases(c - r, delta_pp, ti as i64);
            prop_assert_eq!(bound_b2_release(1, 0, r as u64, offset, &ts, &pa).unwrap(), count as u64 * ci);
        }

        #[test]
        fn b1_matches_deadline_enumeration(window in 0i64..200, period in 1u64..30, demand in 0u64..10) {
            let ts = TaskSet::from_tuples(&[(demand, 0, 30, period)]).unwrap();
            let expected = if window == 0 { 0 } else { (max_deadlines_in_window(window, period as i64) - 1).max(0) };
            prop_assert_eq!(bound_b1(0, window as u64, &ts).unwrap(), expected as u64 * demand);
        }
    }
}
