//! Top-level drivers: full sums, "at most" sums, partial sums through
//! `base^p`, and threshold bracketing.
//!
//! All of them run an [`Engine`], which yields one [`BlockReport`] per
//! digit-length: lengths up to `direct_sum_digits` are enumerated, later ones
//! come from the recurrence.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{IrwinError, Result};
use crate::fixed::Fixed;
use crate::model::{ConditionSet, PrecisionPlan, SeriesKind, MIN_DECIMALS};
use crate::power_sums::{direct_sum, PowerSumTable};
use crate::recurrence::{advance, shrink_active_powers};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    FiniteSeriesExhausted,
    EmptySeries,
    DigitCapReached,
    PartialRequested,
}

/// What happened at one digit-length.
#[derive(Debug, Clone)]
pub struct BlockReport {
    pub digits: u32,
    /// Sum of `1/x` over the qualifying `digits`-digit integers.
    pub block_sum: Fixed,
    /// Running requested sum through this digit-length.
    pub requested_sum: Fixed,
    pub at_most_block: Fixed,
    pub at_most_sum: Fixed,
    /// Largest term added by the recurrence; `None` for enumerated blocks.
    pub max_term: Option<Fixed>,
    /// Powers carried into the next step.
    pub active_powers: usize,
}

/// Stateful digit-length iterator over one condition set.
pub struct Engine {
    conditions: ConditionSet,
    plan: PrecisionPlan,
    target: usize,
    table: Option<PowerSumTable>,
    active_powers: usize,
    next_digits: u32,
    requested_sum: Fixed,
    at_most_sum: Fixed,
    per_count: Vec<Fixed>,
}

impl Engine {
    pub fn new(conditions: &ConditionSet, plan: PrecisionPlan) -> Result<Self> {
        let target = conditions.target_index()?;
        let scale = plan.table_scale;
        let per_count = if conditions.len() == 1 {
            vec![Fixed::zero(scale); conditions.conditions()[0].count as usize + 1]
        } else {
            Vec::new()
        };
        Ok(Engine {
            conditions: conditions.clone(),
            active_powers: plan.max_power,
            plan,
            target,
            table: None,
            next_digits: 1,
            requested_sum: Fixed::zero(scale),
            at_most_sum: Fixed::zero(scale),
            per_count,
        })
    }

    pub fn plan(&self) -> &PrecisionPlan {
        &self.plan
    }

    /// Digit-length the next call to [`Engine::step`] will process.
    pub fn next_digits(&self) -> u32 {
        self.next_digits
    }

    pub fn digits_processed(&self) -> u32 {
        self.next_digits - 1
    }

    pub fn requested_sum(&self) -> &Fixed {
        &self.requested_sum
    }

    pub fn at_most_sum(&self) -> &Fixed {
        &self.at_most_sum
    }

    /// Cumulative sums for `0..=n` occurrences (single-condition sets only).
    pub fn per_count_sums(&self) -> &[Fixed] {
        &self.per_count
    }

    /// Table for the most recently processed digit-length.
    pub fn table(&self) -> Option<&PowerSumTable> {
        self.table.as_ref()
    }

    pub fn active_powers(&self) -> usize {
        self.active_powers
    }

    pub fn step(&mut self) -> Result<BlockReport> {
        let digits = self.next_digits;
        let seed_digits = self.plan.direct_sum_digits;
        let (table, max_term) = if digits <= seed_digits {
            let powers = if digits == seed_digits { self.plan.max_power } else { 1 };
            let table = direct_sum(&self.conditions, digits, powers, &self.plan)?;
            (table, None)
        } else {
            let previous = self.table.as_ref().expect("seed table precedes the recurrence");
            let advanced = advance(previous, &self.conditions, self.active_powers, &self.plan)?;
            self.active_powers =
                shrink_active_powers(&advanced.per_power_max, self.active_powers, &self.plan);
            (advanced.table, Some(advanced.max_term))
        };

        let block_sum = table.get(1, self.target);
        let at_most_block = table.first_row_total();
        self.requested_sum += &block_sum;
        self.at_most_sum += &at_most_block;
        for (k, sum) in self.per_count.iter_mut().enumerate() {
            *sum += &table.get(1, k);
        }
        self.table = Some(table);
        self.next_digits += 1;

        Ok(BlockReport {
            digits,
            block_sum,
            requested_sum: self.requested_sum.clone(),
            at_most_block,
            at_most_sum: self.at_most_sum.clone(),
            max_term,
            active_powers: self.active_powers,
        })
    }

    fn result(&self, termination: Termination) -> SumResult {
        let decimals = self.plan.requested_decimals;
        SumResult {
            decimals,
            requested_sum: self.requested_sum.rescale(decimals),
            at_most_sum: self.at_most_sum.rescale(decimals),
            per_count_sums: self.per_count.iter().map(|s| s.rescale(decimals)).collect(),
            digits_processed: self.digits_processed(),
            termination,
        }
    }
}

/// Outcome of a full or partial summation, rounded to `decimals`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SumResult {
    pub decimals: u32,
    /// Sum of `1/n` over `n` with exactly `count_i` occurrences of each `digit_i`.
    pub requested_sum: Fixed,
    /// Sum over every occurrence vector bounded componentwise by the counts.
    pub at_most_sum: Fixed,
    /// For one condition: the sums for `0, 1, .., count` occurrences.
    pub per_count_sums: Vec<Fixed>,
    pub digits_processed: u32,
    pub termination: Termination,
}

fn empty_result(conditions: &ConditionSet, decimals: u32, digits_processed: u32, termination: Termination) -> SumResult {
    let zero = Fixed::zero(decimals);
    let per_count_sums = if conditions.len() == 1 {
        vec![zero.clone(); conditions.conditions()[0].count as usize + 1]
    } else {
        Vec::new()
    };
    SumResult {
        decimals,
        requested_sum: zero.clone(),
        at_most_sum: zero,
        per_count_sums,
        digits_processed,
        termination,
    }
}

/// Sum of the whole series to `decimals` places.
pub fn irwin_sum(conditions: &ConditionSet, decimals: u32) -> Result<SumResult> {
    let plan = PrecisionPlan::new(conditions, decimals)?;
    irwin_sum_with(conditions, &plan, |_| {})
}

/// [`irwin_sum`] with an explicit plan and a per-digit-length observer.
pub fn irwin_sum_with(
    conditions: &ConditionSet,
    plan: &PrecisionPlan,
    mut observe: impl FnMut(&BlockReport),
) -> Result<SumResult> {
    let finite_limit = match conditions.kind() {
        SeriesKind::Empty => {
            return Ok(empty_result(conditions, plan.requested_decimals, 0, Termination::EmptySeries))
        }
        SeriesKind::Finite { max_digits } => Some(max_digits),
        SeriesKind::Infinite => None,
    };
    let mut engine = Engine::new(conditions, plan.clone())?;
    let mut started = false;
    let mut quiet_blocks = 0;
    loop {
        let digits = engine.next_digits();
        if finite_limit.is_some_and(|limit| digits > limit) {
            return Ok(engine.result(Termination::FiniteSeriesExhausted));
        }
        if digits > plan.max_digit_length {
            return Err(IrwinError::DigitCapReached {
                digits: engine.digits_processed(),
                partial_sum: engine.requested_sum().rescale(plan.requested_decimals).to_string(),
            });
        }
        let report = engine.step()?;
        observe(&report);
        if !report.block_sum.is_zero() {
            started = true;
        }
        // Blocks before the first nonzero one never count towards convergence.
        let Some(max_term) = &report.max_term else {
            continue;
        };
        if started && report.block_sum.abs() < plan.tiny_cutoff_soft && *max_term < plan.tiny_cutoff_hard {
            quiet_blocks += 1;
            if quiet_blocks >= 2 {
                return Ok(engine.result(Termination::Converged));
            }
        } else {
            quiet_blocks = 0;
        }
    }
}

/// Sum of `1/n` over `n` with at most `count_i` occurrences of each `digit_i`.
pub fn at_most_sum(conditions: &ConditionSet, decimals: u32) -> Result<Fixed> {
    irwin_sum(conditions, decimals).map(|r| r.at_most_sum)
}

/// Partial sum over qualifying `n < base^digit_limit`.
pub fn partial_sum(conditions: &ConditionSet, digit_limit: u32, decimals: u32) -> Result<SumResult> {
    let plan = PrecisionPlan::new(conditions, decimals)?;
    partial_sum_with(conditions, digit_limit, &plan, |_| {})
}

pub fn partial_sum_with(
    conditions: &ConditionSet,
    digit_limit: u32,
    plan: &PrecisionPlan,
    mut observe: impl FnMut(&BlockReport),
) -> Result<SumResult> {
    let finite_limit = match conditions.kind() {
        SeriesKind::Empty => {
            return Ok(empty_result(conditions, plan.requested_decimals, 0, Termination::EmptySeries))
        }
        SeriesKind::Finite { max_digits } => max_digits,
        SeriesKind::Infinite => u32::MAX,
    };
    let mut engine = Engine::new(conditions, plan.clone())?;
    // Past the longest possible denominator of a finite series every block is zero.
    while engine.next_digits() <= digit_limit.min(finite_limit) {
        let report = engine.step()?;
        observe(&report);
    }
    Ok(engine.result(Termination::PartialRequested))
}

/// A threshold given as decimal text, optionally with an accuracy suffix
/// (`"23.044287080747`25"`).
///
/// Integers without a decimal point are exact. Otherwise the value is only
/// known to `accuracy` decimals (by default, the number of fractional
/// digits written), i.e. to within half a unit in that place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Threshold {
    value: Fixed,
    accuracy: Option<u32>,
}

impl Threshold {
    pub fn exact(value: Fixed) -> Self {
        Threshold { value, accuracy: None }
    }

    pub fn with_accuracy(mut self, decimals: u32) -> Self {
        self.accuracy = Some(decimals);
        self
    }

    pub fn value(&self) -> &Fixed {
        &self.value
    }

    pub fn accuracy(&self) -> Option<u32> {
        self.accuracy
    }

    fn uncertainty(&self, scale: u32) -> Fixed {
        match self.accuracy {
            Some(a) => Fixed::new(5.into(), a + 1).rescale(scale.max(a + 1)),
            None => Fixed::zero(scale),
        }
    }
}

impl FromStr for Threshold {
    type Err = IrwinError;

    fn from_str(text: &str) -> Result<Self> {
        let invalid = || IrwinError::InvalidThreshold(text.to_string());
        let (number, suffix) = match text.trim().split_once('`') {
            Some((n, s)) => (n, Some(s)),
            None => (text.trim(), None),
        };
        let value: Fixed = number.parse().map_err(|_| invalid())?;
        if value <= Fixed::zero(0) {
            return Err(invalid());
        }
        let accuracy = match suffix {
            Some(s) => Some(s.parse::<u32>().map_err(|_| invalid())?),
            None if number.contains('.') => Some(value.scale()),
            None => None,
        };
        Ok(Threshold { value, accuracy })
    }
}

/// Consecutive digit-lengths whose partial sums bracket a threshold:
/// `s1 < threshold <= s2`, `d2 = d1 + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdResult {
    pub decimals: u32,
    pub d1: u32,
    pub s1: Fixed,
    pub d2: u32,
    pub s2: Fixed,
}

/// Finds how many digits the denominators need for the partial sum to
/// reach `threshold`.
pub fn threshold_search(conditions: &ConditionSet, threshold: &Threshold, decimals: u32) -> Result<ThresholdResult> {
    let decimals = decimals.max(MIN_DECIMALS);
    let working = match threshold.accuracy() {
        Some(a) => decimals.max(a + 5),
        None => decimals,
    };
    let plan = PrecisionPlan::new(conditions, working)?;
    let out = plan.requested_decimals;
    let t = threshold.value().clone();
    let u = threshold.uncertainty(out);
    let err = Fixed::ulp(out);
    let text = match threshold.accuracy() {
        Some(a) if a != t.scale() => format!("{t}`{a}"),
        _ => t.to_string(),
    };
    let insufficient = |reason: &str| IrwinError::InsufficientAccuracy {
        threshold: t.to_string(),
        reason: reason.to_string(),
    };

    let total = irwin_sum_with(conditions, &plan, |_| {})?.requested_sum;
    if &(&t - &u) - &err > total {
        return Err(IrwinError::ThresholdAboveTotal {
            threshold: text,
            total: total.to_string(),
        });
    }
    if &(&t + &u) + &err >= total {
        return Err(insufficient("the threshold cannot be distinguished from the series total"));
    }

    let mut engine = Engine::new(conditions, plan.clone())?;
    let mut d2 = loop {
        let digits = engine.next_digits();
        if digits > plan.max_digit_length {
            return Err(insufficient("partial sums did not reach the threshold"));
        }
        engine.step()?;
        if *engine.requested_sum() >= t {
            break digits;
        }
    };
    let mut s2 = engine.requested_sum().rescale(out);
    let partial = |p: u32| -> Result<Fixed> {
        if p == 0 {
            return Ok(Fixed::zero(out));
        }
        partial_sum_with(conditions, p, &plan, |_| {}).map(|r| r.requested_sum)
    };
    let mut d1 = d2 - 1;
    let mut s1 = partial(d1)?;
    if s1 >= t && d2 > 1 {
        d2 = d1;
        s2 = s1;
        d1 = d2 - 1;
        s1 = partial(d1)?;
    }

    if &s1 + &err >= &t - &u {
        return Err(insufficient("the lower partial sum is not certainly below the threshold"));
    }
    if &s2 - &err < &t + &u {
        return Err(insufficient("the upper partial sum is not certainly at or above the threshold"));
    }
    Ok(ThresholdResult {
        decimals: out,
        d1,
        s1,
        d2,
        s2,
    })
}
