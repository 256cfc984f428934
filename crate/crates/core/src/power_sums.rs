//! Power-sum tables `t(i, j, k)`: the sum of `x^-j` over all `i`-digit
//! integers `x` whose occurrence vector is exactly `k`.
//!
//! Small digit-lengths are filled by enumerating every `i`-digit integer;
//! larger ones come from [`crate::recurrence::advance`].

use std::ops::Range;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{IrwinError, Result};
use crate::fixed::{pow10, round_div, Fixed};
use crate::model::{ConditionSet, PrecisionPlan};

/// Largest `base^digit_length` that [`direct_sum`] will enumerate up to.
pub const DIRECT_SUM_BUDGET: u64 = 100_000_000;

const PARALLEL_CHUNK: u64 = 1 << 14;

/// Values `t(i, j, k)` for one digit-length `i`, powers `1..=powers`, every
/// occurrence cell. Stored as mantissas at a common decimal scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSumTable {
    digit_length: u32,
    powers: usize,
    cells: usize,
    scale: u32,
    values: Vec<BigInt>,
}

impl PowerSumTable {
    pub fn zeros(digit_length: u32, powers: usize, cells: usize, scale: u32) -> Self {
        PowerSumTable {
            digit_length,
            powers,
            cells,
            scale,
            values: vec![BigInt::zero(); powers * cells],
        }
    }

    pub(crate) fn from_rows(digit_length: u32, cells: usize, scale: u32, values: Vec<BigInt>) -> Self {
        debug_assert_eq!(values.len() % cells, 0);
        PowerSumTable {
            digit_length,
            powers: values.len() / cells,
            cells,
            scale,
            values,
        }
    }

    pub fn digit_length(&self) -> u32 {
        self.digit_length
    }

    /// Number of stored powers `J`; rows are `j = 1..=J`.
    pub fn powers(&self) -> usize {
        self.powers
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Raw mantissa of `t(i, power, cell)` at [`PowerSumTable::scale`].
    pub fn mantissa(&self, power: usize, cell: usize) -> &BigInt {
        &self.values[(power - 1) * self.cells + cell]
    }

    pub fn get(&self, power: usize, cell: usize) -> Fixed {
        Fixed::new(self.mantissa(power, cell).clone(), self.scale)
    }

    pub fn row(&self, power: usize) -> &[BigInt] {
        &self.values[(power - 1) * self.cells..power * self.cells]
    }

    /// Sum of the `j = 1` row over every cell (the "at most" block sum).
    pub fn first_row_total(&self) -> Fixed {
        let total: BigInt = self.row(1).iter().sum();
        Fixed::new(total, self.scale)
    }
}

/// Fills the table for `digit_length`-digit integers by enumerating all of
/// them. Integers with any constrained digit occurring more often than its
/// count contribute nothing.
pub fn direct_sum(
    conditions: &ConditionSet,
    digit_length: u32,
    max_power: usize,
    plan: &PrecisionPlan,
) -> Result<PowerSumTable> {
    assert!(digit_length >= 1, "digit length starts at 1");
    assert!(max_power >= 1, "at least one power is needed");
    let base = conditions.base() as u64;
    let too_large = || IrwinError::RangeTooLarge {
        base: conditions.base(),
        digit_length,
    };
    let end = base
        .checked_pow(digit_length)
        .filter(|&v| v <= DIRECT_SUM_BUDGET)
        .ok_or_else(too_large)?;
    let start = end / base;
    let cells = conditions.cell_count()?;
    let scale = plan.table_scale;

    let enumerator = Enumerator::new(conditions, cells, max_power, scale);
    let values = if end - start <= PARALLEL_CHUNK {
        enumerator.run(start..end)
    } else {
        let chunks: Vec<Range<u64>> = (start..end)
            .step_by(PARALLEL_CHUNK as usize)
            .map(|lo| lo..(lo + PARALLEL_CHUNK).min(end))
            .collect();
        let partials: Vec<Vec<BigInt>> = chunks
            .into_par_iter()
            .map(|range| enumerator.run(range))
            .collect();
        // Fixed reduction order keeps the result independent of scheduling.
        let mut acc = vec![BigInt::zero(); max_power * cells];
        for part in partials {
            for (a, p) in acc.iter_mut().zip(part) {
                *a += p;
            }
        }
        acc
    };
    Ok(PowerSumTable::from_rows(digit_length, cells, scale, values))
}

struct Enumerator {
    base: u64,
    /// Condition position for each digit, if constrained.
    position: [Option<usize>; 10],
    limits: Vec<u32>,
    strides: Vec<usize>,
    cells: usize,
    max_power: usize,
    one: BigInt,
}

impl Enumerator {
    fn new(conditions: &ConditionSet, cells: usize, max_power: usize, scale: u32) -> Self {
        let mut position = [None; 10];
        for (p, c) in conditions.conditions().iter().enumerate() {
            position[c.digit as usize] = Some(p);
        }
        Enumerator {
            base: conditions.base() as u64,
            position,
            limits: conditions.counts(),
            strides: conditions.strides(),
            cells,
            max_power,
            one: pow10(scale),
        }
    }

    fn cell_of(&self, mut x: u64, occurrences: &mut [u32]) -> Option<usize> {
        occurrences.iter_mut().for_each(|k| *k = 0);
        while x > 0 {
            let digit = (x % self.base) as usize;
            x /= self.base;
            if let Some(p) = self.position[digit] {
                occurrences[p] += 1;
                if occurrences[p] > self.limits[p] {
                    return None;
                }
            }
        }
        Some(
            occurrences
                .iter()
                .zip(&self.strides)
                .map(|(&k, &s)| k as usize * s)
                .sum(),
        )
    }

    fn run(&self, range: Range<u64>) -> Vec<BigInt> {
        let mut values = vec![BigInt::zero(); self.max_power * self.cells];
        let mut occurrences = vec![0u32; self.limits.len()];
        for x in range {
            let Some(cell) = self.cell_of(x, &mut occurrences) else {
                continue;
            };
            let xb = BigInt::from(x);
            let mut power_of_x = xb.clone();
            for j in 0..self.max_power {
                let term = round_div(&self.one, &power_of_x);
                if term.is_zero() {
                    break;
                }
                values[j * self.cells + cell] += term;
                power_of_x *= &xb;
            }
        }
        values
    }
}

/// `sum of d^n` over the unconstrained digits `d` of the base, with `0^0 = 1`.
pub fn digit_power_sum(base: u32, n: u32, conditions: &ConditionSet) -> BigInt {
    (0..base)
        .filter(|&d| conditions.position_of(d).is_none())
        .map(|d| BigInt::from(d).pow(n))
        .sum()
}

/// `C(n, k)` computed exactly.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// log10 of `sum_{x=lo}^{hi} x^-power`, evaluated as
/// `-power*log10(lo) + log10(sum (lo/x)^power)` so nothing underflows.
fn log10_block_tail(lo: u64, hi: u64, power: usize) -> f64 {
    let lo_f = lo as f64;
    let scaled: f64 = (lo..=hi).map(|x| (lo_f / x as f64).powi(power as i32)).sum();
    scaled.log10() - power as f64 * lo_f.log10()
}

/// log10 of the integral approximation `(hi^(1-c) - lo^(1-c)) / (1-c)` for `c > 1`.
fn log10_integral_tail(lo: f64, hi: f64, c: f64) -> f64 {
    let e = c - 1.0;
    // lo^-e - hi^-e = lo^-e (1 - (lo/hi)^e)
    -e * lo.log10() + (1.0 - (lo / hi).powf(e)).log10() - e.log10()
}

fn first_power_below(lo: u64, hi: u64, start: usize, target: f64) -> Option<usize> {
    (start..=10 * start).find(|&k| log10_block_tail(lo, hi, k) < target)
}

/// Number of powers `J` to carry so that the last directly-summed block,
/// `sum_{x=a}^{b} x^-J'` with `a = base^(D-1)` and `b = base^D - 1`, is
/// below `10^-decimals`; returns `J' + 2`.
pub fn estimate_max_power(base: u32, decimals: u32, direct_digits: u32) -> Result<usize> {
    assert!(direct_digits >= 2, "direct summation must cover at least two digit-lengths");
    let lo = (base as u64).pow(direct_digits - 1);
    let hi = (base as u64).pow(direct_digits) - 1;
    let target = -(decimals as f64);
    let guess = ((10f64.ln() / (base as f64).ln()) * decimals as f64 / (direct_digits - 1) as f64)
        .ceil()
        .max(1.0) as usize;
    if let Some(k) = first_power_below(lo, hi, guess, target) {
        return Ok(k + 2);
    }

    // Solve the integral estimate for the exponent by bisection and retry.
    let (mut left, mut right) = (1.0 + 1e-12, 1e7);
    for _ in 0..200 {
        let mid = 0.5 * (left + right);
        if log10_integral_tail(lo as f64, hi as f64, mid) < target {
            right = mid;
        } else {
            left = mid;
        }
    }
    let retry = right.ceil() as usize;
    first_power_below(lo, hi, retry, target)
        .map(|k| k + 2)
        .ok_or(IrwinError::EstimateFailed {
            decimals,
            estimate: retry,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::OccurrenceVector;
    use num_rational::BigRational;

    fn plan_for(cs: &ConditionSet, decimals: u32) -> PrecisionPlan {
        PrecisionPlan::new(cs, decimals).unwrap()
    }

    /// Independent oracle: exact rational `sum x^-power` for x in [lo, hi).
    fn exact_block(lo: u64, hi: u64, power: i32, keep: impl Fn(u64) -> bool) -> BigRational {
        (lo..hi)
            .filter(|&x| keep(x))
            .map(|x| BigRational::new(BigInt::one(), BigInt::from(x).pow(power as u32)))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    fn to_fixed(r: &BigRational, scale: u32) -> Fixed {
        Fixed::from_ratio(r.numer(), r.denom(), scale)
    }

    #[test]
    fn one_digit_no_nine() {
        let cs = ConditionSet::single(10, 9, 0).unwrap();
        let plan = plan_for(&cs, 15);
        let table = direct_sum(&cs, 1, 1, &plan).unwrap();
        assert_eq!(table.cells(), 1);
        let expected = Fixed::from_ratio(&BigInt::from(761), &BigInt::from(280), plan.table_scale);
        // Eight rounded terms: within 4 ulps of the exact value.
        let err = (&table.get(1, 0) - &expected).abs();
        assert!(err <= Fixed::new(BigInt::from(4), plan.table_scale));
        assert_eq!(table.get(1, 0).rescale(12).to_string(), "2.717857142857");
    }

    #[test]
    fn one_digit_single_nine() {
        let cs = ConditionSet::single(10, 9, 1).unwrap();
        let plan = plan_for(&cs, 15);
        let table = direct_sum(&cs, 1, 3, &plan).unwrap();
        let ninth = Fixed::from_ratio(&BigInt::from(1), &BigInt::from(9), plan.table_scale);
        assert_eq!(table.get(1, 1), ninth);
        let cube = Fixed::from_ratio(&BigInt::from(1), &BigInt::from(729), plan.table_scale);
        assert_eq!(table.get(3, 1), cube);
    }

    #[test]
    fn enumeration_budget() {
        let cs = ConditionSet::single(10, 9, 0).unwrap();
        let plan = plan_for(&cs, 15);
        assert_eq!(
            direct_sum(&cs, 30, 1, &plan),
            Err(IrwinError::RangeTooLarge {
                base: 10,
                digit_length: 30
            })
        );
    }

    #[test]
    fn cells_match_exact_rational_sums() {
        let cs = ConditionSet::new(10, [(9, 2), (3, 1)]).unwrap();
        let plan = plan_for(&cs, 15);
        let table = direct_sum(&cs, 3, 4, &plan).unwrap();
        let tol = Fixed::new(BigInt::from(1000), plan.table_scale);
        for cell in 0..table.cells() {
            let k = cs.unindex(cell).unwrap();
            let keep = |x: u64| {
                let s = x.to_string();
                let nines = s.matches('9').count() as u32;
                let threes = s.matches('3').count() as u32;
                OccurrenceVector(vec![nines, threes]) == k
            };
            for power in 1..=4 {
                let exact = to_fixed(&exact_block(100, 1000, power, keep), plan.table_scale);
                let err = (&table.get(power as usize, cell) - &exact).abs();
                assert!(err <= tol, "cell {cell} power {power}");
            }
        }
    }

    #[test]
    fn at_most_total_matches_brute_force() {
        // Sum over all cells of t(i,1,k) equals the brute-force sum over all
        // i-digit x whose occurrences are componentwise within the bounds.
        let cs = ConditionSet::new(10, [(1, 1), (7, 0)]).unwrap();
        let plan = plan_for(&cs, 15);
        let table = direct_sum(&cs, 3, 1, &plan).unwrap();
        let keep = |x: u64| {
            let s = x.to_string();
            s.matches('1').count() <= 1 && !s.contains('7')
        };
        let exact = to_fixed(&exact_block(100, 1000, 1, keep), plan.table_scale);
        let err = (&table.first_row_total() - &exact).abs();
        assert!(err <= Fixed::new(BigInt::from(1000), plan.table_scale));
    }

    #[test]
    fn cells_non_negative_and_non_increasing_in_power() {
        let cs = ConditionSet::new(10, [(0, 1), (5, 2)]).unwrap();
        let plan = plan_for(&cs, 20);
        let table = direct_sum(&cs, 3, plan.max_power, &plan).unwrap();
        for cell in 0..table.cells() {
            for j in 1..table.powers() {
                assert!(!table.get(j, cell).is_negative());
                assert!(table.get(j + 1, cell) <= table.get(j, cell));
            }
        }
    }

    #[test]
    fn base_two_direct_sum() {
        // 2-digit base-2 integers: 2 (10) and 3 (11); one 1 keeps only 2.
        let cs = ConditionSet::single(2, 1, 1).unwrap();
        let plan = plan_for(&cs, 15);
        let table = direct_sum(&cs, 2, 1, &plan).unwrap();
        assert_eq!(table.get(1, 1).rescale(5).to_string(), "0.50000");
        assert!(table.get(1, 0).is_zero());
    }

    #[test]
    fn digit_power_sums() {
        let nine = ConditionSet::single(10, 9, 0).unwrap();
        assert_eq!(digit_power_sum(10, 0, &nine), BigInt::from(9));
        assert_eq!(digit_power_sum(10, 1, &nine), BigInt::from(36));
        let zero2 = ConditionSet::single(2, 0, 0).unwrap();
        assert_eq!(digit_power_sum(2, 3, &zero2), BigInt::from(1));
        let one2 = ConditionSet::single(2, 1, 0).unwrap();
        assert_eq!(digit_power_sum(2, 0, &one2), BigInt::from(1));
        assert_eq!(digit_power_sum(2, 4, &one2), BigInt::from(0));
    }

    #[test]
    fn digit_power_sum_matches_loop_all_bases() {
        for base in 2..=10u32 {
            let cs = ConditionSet::new(base, [(1, 0), (base as i64 - 1, 2)]).ok();
            let Some(cs) = cs else { continue };
            for n in 0..=10u32 {
                let mut expected = BigInt::zero();
                for d in 0..base {
                    if d == 1 || d == base - 1 {
                        continue;
                    }
                    let mut p = BigInt::one();
                    for _ in 0..n {
                        p *= d;
                    }
                    expected += p;
                }
                assert_eq!(digit_power_sum(base, n, &cs), expected, "base {base} n {n}");
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(30, 15), BigInt::from(155_117_520u64));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(binomial(0, 0), BigInt::one());
    }

    /// Oracle: exact `sum_{x=lo}^{hi} x^-k < 10^-decimals`, smallest k >= start.
    fn smallest_power_exact(lo: u64, hi: u64, start: usize, decimals: u32) -> usize {
        let eps = BigRational::new(BigInt::one(), pow10(decimals));
        (start..).find(|&k| exact_block(lo, hi + 1, k as i32, |_| true) < eps).unwrap()
    }

    #[test]
    fn max_power_base_ten_fifteen_decimals() {
        let j = estimate_max_power(10, 15, 3).unwrap();
        assert_eq!(j, smallest_power_exact(100, 999, 8, 15) + 2);
        assert_eq!(j, 11);
    }

    #[test]
    fn max_power_base_two_twenty_decimals() {
        let j = estimate_max_power(2, 20, 10).unwrap();
        assert_eq!(j, smallest_power_exact(512, 1023, 8, 20) + 2);
    }

    #[test]
    fn max_power_tail_bound_holds() {
        for (base, decimals) in [(10u32, 22u32), (2, 17), (3, 30), (7, 12)] {
            let d = crate::model::direct_sum_digits(base);
            let j = estimate_max_power(base, decimals, d).unwrap();
            let lo = (base as u64).pow(d - 1);
            let hi = (base as u64).pow(d);
            let tail = exact_block(lo, hi, j as i32, |_| true);
            assert!(tail < BigRational::new(BigInt::one(), pow10(decimals)));
        }
    }

    #[test]
    fn max_power_monotone_in_decimals() {
        for base in 2..=10u32 {
            let d = crate::model::direct_sum_digits(base);
            let mut last = 0;
            for decimals in 5..60 {
                let j = estimate_max_power(base, decimals, d).unwrap();
                assert!(j >= last);
                last = j;
            }
        }
    }
}
