//! Integer time base and the exact arithmetic helpers the analysis relies on.
//!
//! One tick is one microsecond by convention. Every quantity the tests and
//! the simulator compare is an integer number of ticks; rationals only appear
//! in configuration (`η`, `λ`, utilizations) and are rounded to ticks at the
//! boundary.

use std::str::FromStr;

use num::rational::Ratio;

use crate::error::Error;

/// A non-negative duration or instant, in ticks.
pub type Tick = u64;

/// A signed tick count. Relative priority points and intermediate terms of
/// the response-time expressions may be negative.
pub type SignedTick = i64;

/// Ticks per millisecond.
pub const TICKS_PER_MS: Tick = 1_000;

/// Mathematical ceiling of `num / den` for a positive divisor.
///
/// Rounds towards positive infinity for negative numerators too:
/// `ceil_div(-4, 16) == 0` and `ceil_div(-5, 5) == -1`.
#[inline]
pub fn ceil_div(num: SignedTick, den: SignedTick) -> SignedTick {
    debug_assert!(den > 0, "ceil_div requires a positive divisor");
    let q = num.div_euclid(den);
    if num.rem_euclid(den) != 0 {
        q + 1
    } else {
        q
    }
}

/// Rounds a non-negative-denominator rational to the nearest integer, ties up.
pub fn round_half_up(value: Ratio<i128>) -> i128 {
    // floor(value + 1/2) = floor((2n + d) / 2d)
    let (n, d) = (*value.numer(), *value.denom());
    (2 * n + d).div_euclid(2 * d)
}

/// Parses a decimal (`-0.25`, `3`) or fraction (`-1/4`) literal exactly.
pub fn parse_ratio(text: &str) -> Result<Ratio<i64>, Error> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = text.split_once('/') {
        let n = i64::from_str(n.trim()).map_err(|_| bad())?;
        let d = i64::from_str(d.trim()).map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let all_digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) || frac_part.len() > 15 {
        return Err(bad());
    }
    let scale = 10_i64.pow(frac_part.len() as u32);
    let int_val = if int_part.is_empty() { 0 } else { i64::from_str(int_part).map_err(|_| bad())? };
    let frac_val = if frac_part.is_empty() { 0 } else { i64::from_str(frac_part).map_err(|_| bad())? };
    let numer = int_val.checked_mul(scale).and_then(|v| v.checked_add(frac_val)).ok_or_else(bad)?;
    Ok(Ratio::new(if negative { -numer } else { numer }, scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_div_signed_cases() {
        assert_eq!(ceil_div(-4, 16), 0);
        assert_eq!(ceil_div(-5, 5), -1);
        assert_eq!(ceil_div(-6, 5), -1);
        assert_eq!(ceil_div(0, 7), 0);
        assert_eq!(ceil_div(11, 5), 3);
        assert_eq!(ceil_div(10, 5), 2);
    }

    #[test]
    fn round_half_up_ties() {
        assert_eq!(round_half_up(Ratio::new(5, 2)), 3);
        assert_eq!(round_half_up(Ratio::new(-5, 2)), -2);
        assert_eq!(round_half_up(Ratio::new(7, 3)), 2);
        assert_eq!(round_half_up(Ratio::new(-7, 3)), -2);
    }

    #[test]
    fn parse_ratio_forms() {
        assert_eq!(parse_ratio("0.01").unwrap(), Ratio::new(1, 100));
        assert_eq!(parse_ratio("-1.5").unwrap(), Ratio::new(-3, 2));
        assert_eq!(parse_ratio("3").unwrap(), Ratio::from_integer(3));
        assert_eq!(parse_ratio("-1/4").unwrap(), Ratio::new(-1, 4));
        assert_eq!(parse_ratio(".5").unwrap(), Ratio::new(1, 2));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
        assert!(parse_ratio("").is_err());
    }
}
