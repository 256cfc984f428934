//! Advancing power-sum tables from `i`-digit to `(i+1)`-digit integers.
//!
//! Every `(i+1)`-digit member of a cell is `base*x + d` for an `i`-digit `x`.
//! Expanding
//!
//! ```text
//! (base*x + d)^-j = sum_{n>=0} (-1)^n C(j+n-1, n) d^n / (base^(j+n) x^(j+n))
//! ```
//!
//! and summing over `x` turns sums of `x^-(j+n)` at length `i` into the sum
//! of `(base*x+d)^-j` at length `i+1`. Appending a constrained digit `d_c`
//! moves `x` from the cell with `k_c - 1` occurrences into cell `k`;
//! appending any unconstrained digit keeps the cell, and those digits enter
//! only through `sum d^n` (with `0^0 = 1`).
//!
//! For each target value all terms share the denominator
//! `base^(j + J)`, so the numerator is accumulated exactly in integers and
//! rounded once.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::Result;
use crate::fixed::{round_div, Fixed};
use crate::model::{ConditionSet, PrecisionPlan};
use crate::power_sums::{binomial, digit_power_sum, PowerSumTable};

/// `a(j, n) = (-1)^n C(j+n-1, n) / base^(j+n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceCoefficient {
    pub base: u32,
    pub power: usize,
    pub order: usize,
}

impl RecurrenceCoefficient {
    pub fn new(base: u32, power: usize, order: usize) -> Self {
        assert!(power >= 1);
        RecurrenceCoefficient { base, power, order }
    }

    /// Signed binomial `(-1)^n C(j+n-1, n)`.
    pub fn numerator(&self) -> BigInt {
        let c = binomial((self.power + self.order - 1) as u64, self.order as u64);
        if self.order % 2 == 1 {
            -c
        } else {
            c
        }
    }

    pub fn denominator(&self) -> BigInt {
        BigInt::from(self.base).pow((self.power + self.order) as u32)
    }

    pub fn value(&self, scale: u32) -> Fixed {
        Fixed::from_ratio(&self.numerator(), &self.denominator(), scale)
    }
}

/// Result of one recurrence step.
#[derive(Debug, Clone)]
pub struct Advanced {
    pub table: PowerSumTable,
    /// Largest `|term|` added anywhere in the step.
    pub max_term: Fixed,
    /// Largest `|term|` added while computing each power `j` (index `j - 1`).
    pub per_power_max: Vec<Fixed>,
}

/// Integer weights sharing the denominator `base^(j + J)`:
/// `(-1)^n C(j+n-1, n) * digit_factor * base^(J - n)`.
struct Weights {
    active: usize,
    /// `[c][j-1][n]` for constrained digit `c`; factor `d_c^n`.
    constrained: Vec<Vec<Vec<BigInt>>>,
    /// `[j-1][n]`; factor `sum of d^n` over unconstrained digits.
    free: Vec<Vec<BigInt>>,
    /// `[j-1]`: `base^(j + J)`.
    denominators: Vec<BigInt>,
}

impl Weights {
    fn new(conditions: &ConditionSet, active: usize) -> Self {
        let base = conditions.base();
        let base_big = BigInt::from(base);
        let pow_base: Vec<BigInt> = (0..=2 * active as u32).map(|e| base_big.pow(e)).collect();
        let power_sums: Vec<BigInt> = (0..active as u32)
            .map(|n| digit_power_sum(base, n, conditions))
            .collect();

        let signed_binomials: Vec<Vec<BigInt>> = (1..=active)
            .map(|j| {
                (0..=active - j)
                    .map(|n| RecurrenceCoefficient::new(base, j, n).numerator() * &pow_base[active - n])
                    .collect()
            })
            .collect();

        let free = signed_binomials
            .iter()
            .map(|row| row.iter().zip(&power_sums).map(|(w, b)| w * b).collect())
            .collect();

        let constrained = conditions
            .conditions()
            .iter()
            .map(|c| {
                let d = BigInt::from(c.digit);
                signed_binomials
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .map(|(n, w)| w * d.pow(n as u32))
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let denominators = (1..=active).map(|j| pow_base[j + active].clone()).collect();
        Weights {
            active,
            constrained,
            free,
            denominators,
        }
    }
}

/// For each cell, the `(condition, source cell)` pairs reached by removing
/// one occurrence of a constrained digit.
fn predecessors(conditions: &ConditionSet, cells: usize) -> Vec<Vec<(usize, usize)>> {
    let strides = conditions.strides();
    let radices: Vec<usize> = conditions.counts().iter().map(|&n| n as usize + 1).collect();
    (0..cells)
        .map(|cell| {
            let mut rest = cell;
            let mut preds = Vec::new();
            for (c, &radix) in radices.iter().enumerate() {
                if rest % radix > 0 {
                    preds.push((c, cell - strides[c]));
                }
                rest /= radix;
            }
            preds
        })
        .collect()
}

struct CellResult {
    values: Vec<BigInt>,
    max_numerators: Vec<BigUint>,
}

fn advance_cell(
    table: &PowerSumTable,
    weights: &Weights,
    preds: &[(usize, usize)],
    cell: usize,
) -> CellResult {
    let active = weights.active;
    let mut values = Vec::with_capacity(active);
    let mut max_numerators = Vec::with_capacity(active);
    for j in 1..=active {
        let mut acc = BigInt::zero();
        let mut max = BigUint::zero();
        // Ascending n for a fixed accumulation order.
        for n in 0..=active - j {
            let row = j + n;
            for &(c, src) in preds {
                let w = &weights.constrained[c][j - 1][n];
                let t = table.mantissa(row, src);
                if w.is_zero() || t.is_zero() {
                    continue;
                }
                let term = w * t;
                if term.magnitude() > &max {
                    max = term.magnitude().clone();
                }
                acc += term;
            }
            let w = &weights.free[j - 1][n];
            let t = table.mantissa(row, cell);
            if !w.is_zero() && !t.is_zero() {
                let term = w * t;
                if term.magnitude() > &max {
                    max = term.magnitude().clone();
                }
                acc += term;
            }
        }
        values.push(round_div(&acc, &weights.denominators[j - 1]));
        max_numerators.push(max);
    }
    CellResult {
        values,
        max_numerators,
    }
}

/// Computes `t(i+1, j, k)` for `j = 1..=active_powers` from `t(i, ., .)`,
/// truncating each inner sum at `n = active_powers - j` so that only stored
/// powers are read.
pub fn advance(
    table: &PowerSumTable,
    conditions: &ConditionSet,
    active_powers: usize,
    plan: &PrecisionPlan,
) -> Result<Advanced> {
    assert!(active_powers >= 1 && active_powers <= table.powers());
    let cells = conditions.cell_count()?;
    assert_eq!(cells, table.cells(), "table does not match the condition set");
    let scale = table.scale();
    debug_assert_eq!(scale, plan.table_scale);
    let weights = Weights::new(conditions, active_powers);
    let preds = predecessors(conditions, cells);

    let results: Vec<CellResult> = (0..cells)
        .into_par_iter()
        .with_min_len(64)
        .map(|cell| advance_cell(table, &weights, &preds[cell], cell))
        .collect();

    let mut values = vec![BigInt::zero(); active_powers * cells];
    let mut max_numerators = vec![BigUint::zero(); active_powers];
    for (cell, result) in results.into_iter().enumerate() {
        for (j, (v, m)) in result
            .values
            .into_iter()
            .zip(result.max_numerators)
            .enumerate()
        {
            values[j * cells + cell] = v;
            if m > max_numerators[j] {
                max_numerators[j] = m;
            }
        }
    }

    let per_power_max: Vec<Fixed> = max_numerators
        .into_iter()
        .zip(&weights.denominators)
        .map(|(m, den)| Fixed::new(round_div(&BigInt::from(m), den), scale))
        .collect();
    let max_term = per_power_max
        .iter()
        .max()
        .cloned()
        .unwrap_or_else(|| Fixed::zero(scale));
    Ok(Advanced {
        table: PowerSumTable::from_rows(table.digit_length() + 1, cells, scale, values),
        max_term,
        per_power_max,
    })
}

/// Smallest `j' >= 2` such that every power `j >= j'` had all of its terms
/// below the hard cutoff; never more than `active_powers`.
pub fn shrink_active_powers(per_power_max: &[Fixed], active_powers: usize, plan: &PrecisionPlan) -> usize {
    if active_powers < 2 {
        return active_powers;
    }
    let mut shrunk = active_powers;
    for j in (2..=active_powers.min(per_power_max.len())).rev() {
        if per_power_max[j - 1] < plan.tiny_cutoff_hard {
            shrunk = j;
        } else {
            break;
        }
    }
    shrunk
}

/// `true` if every value in the table is zero or within `tolerance` below it.
pub fn first_row_is_non_negative(table: &PowerSumTable, tolerance: &Fixed) -> bool {
    let floor = -tolerance.rescale(table.scale());
    table
        .row(1)
        .iter()
        .all(|m| !m.is_negative() || Fixed::new(m.clone(), table.scale()) >= floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power_sums::direct_sum;
    use num_rational::BigRational;
    use num_traits::One;

    fn plan(cs: &ConditionSet, decimals: u32) -> PrecisionPlan {
        PrecisionPlan::new(cs, decimals).unwrap()
    }

    /// Independent brute-force oracle: exact sum of 1/x over `digits`-digit
    /// base-10 x, grouped by the given predicate.
    fn brute_block(digits: u32, keep: impl Fn(&str) -> bool) -> BigRational {
        let lo = 10u64.pow(digits - 1);
        let hi = 10u64.pow(digits);
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        // Accumulate as a plain fraction without reduction until the end.
        for x in lo..hi {
            if keep(&x.to_string()) {
                num = num * x + &den;
                den *= x;
                if den.bits() > 4096 {
                    let r = BigRational::new(num.clone(), den.clone());
                    num = r.numer().clone();
                    den = r.denom().clone();
                }
            }
        }
        BigRational::new(num, den)
    }

    fn assert_close(value: &Fixed, exact: &BigRational, decimals: u32) {
        let expected = Fixed::from_ratio(exact.numer(), exact.denom(), value.scale());
        let diff = (value - &expected).abs();
        assert!(
            diff < Fixed::pow10_neg(decimals, value.scale()),
            "value {value} expected {expected}"
        );
    }

    #[test]
    fn coefficient_values() {
        let a = RecurrenceCoefficient::new(10, 1, 0);
        assert_eq!(a.value(5).to_string(), "0.10000");
        let a = RecurrenceCoefficient::new(10, 2, 1);
        assert_eq!(a.numerator(), BigInt::from(-2));
        assert_eq!(a.denominator(), BigInt::from(1000));
        let a = RecurrenceCoefficient::new(10, 3, 2);
        assert_eq!(a.numerator(), BigInt::from(6));
    }

    #[test]
    fn coefficient_ratio_decays_past_crossover() {
        for base in [2u32, 3, 10] {
            for j in 1..12usize {
                for n in 0..40usize {
                    if ((n + 1) as f64) < j as f64 / (base as f64 - 1.0) {
                        continue;
                    }
                    let a = RecurrenceCoefficient::new(base, j, n);
                    let b = RecurrenceCoefficient::new(base, j, n + 1);
                    let ra = BigRational::new(a.numerator().abs(), a.denominator());
                    let rb = BigRational::new(b.numerator().abs(), b.denominator());
                    assert!(rb < ra, "base {base} j {j} n {n}");
                }
            }
        }
    }

    #[test]
    fn one_step_no_nine_matches_brute_force() {
        let cs = ConditionSet::single(10, 9, 0).unwrap();
        let p = plan(&cs, 15);
        let seed = direct_sum(&cs, 3, p.max_power, &p).unwrap();
        let next = advance(&seed, &cs, p.max_power, &p).unwrap();
        assert_eq!(next.table.digit_length(), 4);
        let exact = brute_block(4, |s| !s.contains('9'));
        assert_close(&next.table.get(1, 0), &exact, p.working_decimals);
    }

    #[test]
    fn one_step_single_nine_matches_brute_force() {
        let cs = ConditionSet::single(10, 9, 1).unwrap();
        let p = plan(&cs, 15);
        let seed = direct_sum(&cs, 3, p.max_power, &p).unwrap();
        let next = advance(&seed, &cs, p.max_power, &p).unwrap();
        let exact = brute_block(4, |s| s.matches('9').count() == 1);
        assert_close(&next.table.get(1, 1), &exact, p.working_decimals);
        let exact0 = brute_block(4, |s| !s.contains('9'));
        assert_close(&next.table.get(1, 0), &exact0, p.working_decimals);
    }

    #[test]
    fn one_step_zero_digit_condition() {
        // Constrained digit 0 contributes only through its n = 0 term.
        let cs = ConditionSet::single(10, 0, 2).unwrap();
        let p = plan(&cs, 15);
        let seed = direct_sum(&cs, 3, p.max_power, &p).unwrap();
        let next = advance(&seed, &cs, p.max_power, &p).unwrap();
        for k in 0..=2usize {
            let exact = brute_block(4, |s| s.matches('0').count() == k);
            assert_close(&next.table.get(1, k), &exact, p.working_decimals);
        }
    }

    #[test]
    fn zero_table_stays_zero() {
        let cs = ConditionSet::new(10, [(9, 1), (3, 1)]).unwrap();
        let p = plan(&cs, 15);
        let zero = PowerSumTable::zeros(5, p.max_power, 4, p.table_scale);
        let next = advance(&zero, &cs, p.max_power, &p).unwrap();
        for j in 1..=p.max_power {
            for cell in 0..4 {
                assert!(next.table.get(j, cell).is_zero());
            }
        }
        assert!(next.max_term.is_zero());
    }

    #[test]
    fn per_power_maxima_shape() {
        let cs = ConditionSet::single(10, 9, 0).unwrap();
        let p = plan(&cs, 15);
        let seed = direct_sum(&cs, 3, p.max_power, &p).unwrap();
        let next = advance(&seed, &cs, p.max_power, &p).unwrap();
        assert_eq!(next.per_power_max.len(), p.max_power);
        assert_eq!(next.max_term, next.per_power_max[0]);
        // The leading term for j = 1 is (base - 1) * t(3,1) / 10.
        assert!(next.max_term > Fixed::pow10_neg(1, p.table_scale));
        assert!(next.max_term < Fixed::from_integer(2, 0));
    }

    #[test]
    fn shrink_rules() {
        let cs = ConditionSet::single(10, 9, 0).unwrap();
        let p = plan(&cs, 15);
        let big = Fixed::pow10_neg(3, p.table_scale);
        let tiny = Fixed::zero(p.table_scale);
        let all_big = vec![big.clone(); 12];
        assert_eq!(shrink_active_powers(&all_big, 12, &p), 12);
        let mut tail = vec![big.clone(); 6];
        tail.extend(vec![tiny.clone(); 6]);
        assert_eq!(shrink_active_powers(&tail, 12, &p), 7);
        // A large value above a tiny one blocks shrinking past it.
        let mut gap = vec![big.clone(); 12];
        gap[3] = tiny.clone();
        assert_eq!(shrink_active_powers(&gap, 12, &p), 12);
        assert_eq!(shrink_active_powers(&vec![tiny; 12], 12, &p), 2);
    }
}
