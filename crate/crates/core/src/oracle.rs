//! Brute-force reference values, kept independent of the summation engine.
//!
//! Everything here works from digit strings (`char::from_digit`) or an
//! explicit digit-by-digit search. Nothing here touches the power-sum tables.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{IrwinError, Result};
use crate::fixed::{pow10, round_div, Fixed};
use crate::model::ConditionSet;

/// Largest number of integers any single oracle call may examine.
pub const ORACLE_BUDGET: u64 = 100_000_000;

/// Ranges up to this many integers are summed as exact rationals.
pub const EXACT_RATIONAL_LIMIT: u64 = 10_000;

const GUARD: u32 = 10;
const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Occurrence vector equals the condition counts.
    ExactCount,
    /// Occurrence vector is bounded componentwise by the condition counts.
    AtMost,
}

/// Digit occurrences of `n` written in `base`, indexed by digit.
pub fn digit_histogram(n: u128, base: u32) -> [u32; 10] {
    let mut histogram = [0u32; 10];
    let mut buf = ['0'; 128];
    let mut len = 0;
    let mut rest = n;
    loop {
        buf[len] = char::from_digit((rest % base as u128) as u32, base).unwrap();
        len += 1;
        rest /= base as u128;
        if rest == 0 {
            break;
        }
    }
    for c in &buf[..len] {
        histogram[c.to_digit(base).unwrap() as usize] += 1;
    }
    histogram
}

fn qualifies(histogram: &[u32; 10], conditions: &ConditionSet, mode: OracleMode) -> bool {
    conditions.conditions().iter().all(|c| {
        let seen = histogram[c.digit as usize];
        match mode {
            OracleMode::ExactCount => seen == c.count,
            OracleMode::AtMost => seen <= c.count,
        }
    })
}

fn check_budget(lo: u128, hi: u128) -> Result<()> {
    let span = hi.saturating_sub(lo);
    if span > ORACLE_BUDGET as u128 {
        return Err(IrwinError::LimitTooLarge {
            limit: hi,
            budget: ORACLE_BUDGET,
        });
    }
    Ok(())
}

/// Sum of `1/n` over qualifying `1 <= n < limit`, rounded to `decimals`.
pub fn brute_force_sum(conditions: &ConditionSet, limit: u128, mode: OracleMode, decimals: u32) -> Result<Fixed> {
    brute_force_range(conditions, 1, limit, mode, decimals)
}

/// Sum of `1/n` over qualifying `lo <= n < hi`, rounded to `decimals`.
///
/// Small ranges are summed exactly; larger ones add terms rounded to
/// `decimals + 10` places, so the accumulated error stays far below the
/// last requested place.
pub fn brute_force_range(
    conditions: &ConditionSet,
    lo: u128,
    hi: u128,
    mode: OracleMode,
    decimals: u32,
) -> Result<Fixed> {
    let lo = lo.max(1);
    check_budget(lo, hi)?;
    if hi <= lo {
        return Ok(Fixed::zero(decimals));
    }
    if hi - lo <= EXACT_RATIONAL_LIMIT as u128 {
        let exact = exact_range(conditions, lo, hi, mode);
        return Ok(Fixed::from_ratio(exact.numer(), exact.denom(), decimals));
    }
    let scale = decimals + GUARD;
    let total = if scale <= 36 {
        let unit = 10u128.pow(scale);
        let mantissa: u128 = chunks(lo, hi)
            .into_par_iter()
            .map(|(a, b)| {
                (a..b)
                    .filter(|&n| qualifies(&digit_histogram(n, conditions.base()), conditions, mode))
                    .map(|n| (unit + n / 2) / n)
                    .sum::<u128>()
            })
            .sum();
        Fixed::new(BigInt::from(mantissa), scale)
    } else {
        let unit = pow10(scale);
        let parts: Vec<BigInt> = chunks(lo, hi)
            .into_par_iter()
            .map(|(a, b)| {
                (a..b)
                    .filter(|&n| qualifies(&digit_histogram(n, conditions.base()), conditions, mode))
                    .map(|n| round_div(&unit, &BigInt::from(n)))
                    .sum::<BigInt>()
            })
            .collect();
        Fixed::new(parts.into_iter().sum(), scale)
    };
    Ok(total.rescale(decimals))
}

fn chunks(lo: u128, hi: u128) -> Vec<(u128, u128)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = (a + CHUNK as u128).min(hi);
        out.push((a, b));
        a = b;
    }
    out
}

/// Exact rational sum of `1/n` over qualifying `lo <= n < hi`.
pub fn exact_range(conditions: &ConditionSet, lo: u128, hi: u128, mode: OracleMode) -> BigRational {
    let mut total = BigRational::zero();
    for n in lo.max(1)..hi {
        if qualifies(&digit_histogram(n, conditions.base()), conditions, mode) {
            total += BigRational::new(BigInt::one(), BigInt::from(n));
        }
    }
    total
}

/// Walks every qualifying integer below `limit` by extending digit strings
/// one digit at a time, calling `visit` on each. Prefixes that already
/// exceed a count are pruned, so sparse finite series stay cheap even for
/// large limits. Fails once more than [`ORACLE_BUDGET`] prefixes are examined.
pub fn enumerate_terms(
    conditions: &ConditionSet,
    limit: u128,
    mode: OracleMode,
    mut visit: impl FnMut(u128),
) -> Result<()> {
    let base = conditions.base();
    let mut bounds = [u32::MAX; 10];
    for c in conditions.conditions() {
        bounds[c.digit as usize] = c.count;
    }
    let mut walker = Walker {
        base: base as u128,
        limit,
        bounds,
        counts: [0; 10],
        conditions,
        mode,
        examined: 0,
    };
    for lead in 1..base {
        walker.descend(lead as u128, lead as usize, &mut visit)?;
    }
    Ok(())
}

struct Walker<'a> {
    base: u128,
    limit: u128,
    bounds: [u32; 10],
    counts: [u32; 10],
    conditions: &'a ConditionSet,
    mode: OracleMode,
    examined: u64,
}

impl Walker<'_> {
    fn descend(&mut self, value: u128, digit: usize, visit: &mut impl FnMut(u128)) -> Result<()> {
        if value >= self.limit || self.counts[digit] >= self.bounds[digit] {
            return Ok(());
        }
        self.examined += 1;
        if self.examined > ORACLE_BUDGET {
            return Err(IrwinError::LimitTooLarge {
                limit: self.limit,
                budget: ORACLE_BUDGET,
            });
        }
        self.counts[digit] += 1;
        let matched = self.conditions.conditions().iter().all(|c| match self.mode {
            OracleMode::ExactCount => self.counts[c.digit as usize] == c.count,
            OracleMode::AtMost => true,
        });
        if matched {
            visit(value);
        }
        if let Some(next) = value.checked_mul(self.base) {
            for d in 0..self.base {
                self.descend(next + d, d as usize, visit)?;
            }
        }
        self.counts[digit] -= 1;
        Ok(())
    }
}

/// Number of qualifying integers below `limit`.
pub fn count_terms(conditions: &ConditionSet, limit: u128, mode: OracleMode) -> Result<u64> {
    let mut count = 0u64;
    enumerate_terms(conditions, limit, mode, |_| count += 1)?;
    Ok(count)
}

/// Sum of `1/n` over the integers produced by [`enumerate_terms`].
pub fn enumerated_sum(conditions: &ConditionSet, limit: u128, mode: OracleMode, decimals: u32) -> Result<Fixed> {
    let scale = decimals + GUARD;
    let unit = pow10(scale);
    let mut total = BigInt::zero();
    enumerate_terms(conditions, limit, mode, |n| total += round_div(&unit, &BigInt::from(n)))?;
    Ok(Fixed::new(total, scale).rescale(decimals))
}

/// `9^(i-1) + 8(i-1)9^(i-2)`: the number of `i`-digit base-10 integers with
/// exactly one occurrence of the nonzero digit `d`. `None` for `d = 0`,
/// where leading zeros break the count, and for invalid arguments.
pub fn count_one_digit_numbers(d: u32, i: u32) -> Option<u128> {
    if d == 0 || d > 9 || i == 0 {
        return None;
    }
    if i == 1 {
        return Some(1);
    }
    Some(9u128.pow(i - 1) + 8 * (i as u128 - 1) * 9u128.pow(i - 2))
}

/// Number of `i`-digit integers in `base` with exactly `occurrences` of `digit`.
pub fn count_by_enumeration(base: u32, digit: u32, occurrences: u32, i: u32) -> Result<u64> {
    let lo = if i == 1 { 1 } else { (base as u128).pow(i - 1) };
    let hi = (base as u128).pow(i);
    check_budget(lo, hi)?;
    Ok((lo..hi)
        .into_par_iter()
        .filter(|&n| digit_histogram(n, base)[digit as usize] == occurrences)
        .count() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base2Kind {
    /// `sum 1/(2^n - 1)`: binary numbers without a 0.
    NoZero,
    /// `sum_{n>=2} sum_{k=0}^{n-2} 1/(2^n - 1 - 2^k)`: exactly one 0.
    SingleZero,
    /// `sum 1/2^k`: exactly one 1.
    SingleOne,
}

/// A truncated closed-form sum; the full series lies in
/// `[value, value + tail_bound]` up to rounding in the last place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedFormSum {
    pub value: Fixed,
    pub terms: u32,
    pub tail_bound: Fixed,
}

/// First `terms` outer terms of a base-2 closed form.
pub fn closed_form_base2(kind: Base2Kind, terms: u32, decimals: u32) -> ClosedFormSum {
    let scale = decimals + GUARD;
    let unit = pow10(scale);
    let one = BigInt::one();
    let two = |e: u32| BigInt::one() << e as usize;
    let mut total = BigInt::zero();
    for t in 0..terms {
        match kind {
            Base2Kind::NoZero => total += round_div(&unit, &(two(t + 1) - &one)),
            Base2Kind::SingleZero => {
                let n = t + 2;
                for k in 0..=n - 2 {
                    total += round_div(&unit, &(two(n) - &one - two(k)));
                }
            }
            Base2Kind::SingleOne => total += round_div(&unit, &two(t)),
        }
    }
    ClosedFormSum {
        value: Fixed::new(total, scale).rescale(decimals),
        terms,
        tail_bound: tail_bound(kind, terms, decimals),
    }
}

/// Upper bound on what the omitted outer terms add, rounded up.
///
/// NoZero: `1/(2^n - 1) <= 2^(1-n)`. SingleZero: each of the `n - 1` inner
/// terms is at most `2^(1-n)`, and `sum_{m>=M} m 2^-m = (M+1) 2^(1-M)`.
/// SingleOne: geometric.
fn tail_bound(kind: Base2Kind, terms: u32, decimals: u32) -> Fixed {
    let (numerator, exp) = match kind {
        Base2Kind::NoZero | Base2Kind::SingleOne => (BigInt::from(2), terms),
        Base2Kind::SingleZero => (BigInt::from(terms + 2), terms),
    };
    let den = BigInt::one() << exp as usize;
    Fixed::new((numerator * pow10(decimals)).div_ceil(&den), decimals)
}

/// Smallest multiple of 8 terms whose tail bound is below `10^-(decimals + 2)`.
pub fn closed_form_base2_to(kind: Base2Kind, decimals: u32) -> ClosedFormSum {
    let target = Fixed::pow10_neg(decimals + 2, decimals + 3);
    let mut terms = 8;
    while tail_bound(kind, terms, decimals + 3) >= target {
        terms += 8;
    }
    closed_form_base2(kind, terms, decimals)
}

/// `2 atanh(1/q)` at `scale` decimals (`q >= 2`).
fn ln_ratio(q: u32, scale: u32) -> Fixed {
    let work = scale + GUARD;
    let unit = pow10(work);
    let q = BigInt::from(q);
    let q2 = &q * &q;
    let mut power = q.clone();
    let mut total = BigInt::zero();
    let mut k = 0u32;
    loop {
        let term = round_div(&unit, &(&power * BigInt::from(2 * k + 1)));
        if term.is_zero() {
            break;
        }
        total += term;
        power *= &q2;
        k += 1;
    }
    Fixed::new(total * 2, work).rescale(scale)
}

/// Natural logarithm of 2 to `scale` decimals.
pub fn ln2(scale: u32) -> Fixed {
    ln_ratio(3, scale + 2).rescale(scale)
}

/// Natural logarithm of 10 to `scale` decimals, as `3 ln 2 + ln(5/4)`.
pub fn ln10(scale: u32) -> Fixed {
    let s = scale + 2;
    let three_ln2 = Fixed::new(ln_ratio(3, s).into_mantissa() * 3, s);
    (&three_ln2 + &ln_ratio(9, s)).rescale(scale)
}
