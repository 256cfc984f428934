//! Domain types shared by every stage of the computation: the digit
//! conditions, occurrence vectors with their mixed-radix cell index, and
//! the precision plan.

use serde::Serialize;

use crate::error::{IrwinError, Result};
use crate::fixed::Fixed;
use crate::power_sums::estimate_max_power;

pub const MIN_BASE: u32 = 2;
pub const MAX_BASE: u32 = 10;

/// Largest number of occurrence cells a single table may hold.
pub const MAX_CELLS: usize = 1 << 24;

/// "Digit `digit` occurs exactly (or at most) `count` times."
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub digit: u32,
    pub count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Infinite,
    /// Every digit is constrained; no denominator has more than `max_digits` digits.
    Finite { max_digits: u32 },
    /// No positive integer qualifies.
    Empty,
}

/// A radix together with an ordered list of digit conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionSet {
    base: u32,
    conditions: Vec<Condition>,
}

impl ConditionSet {
    /// Validates `(digit, count)` pairs for the given base.
    pub fn new<I>(base: u32, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, i64)>,
    {
        if !(MIN_BASE..=MAX_BASE).contains(&base) {
            return Err(IrwinError::BaseOutOfRange { base: base as i64 });
        }
        let pairs: Vec<(i64, i64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(IrwinError::NoConditions);
        }
        if pairs.len() > base as usize {
            return Err(IrwinError::TooManyConditions {
                count: pairs.len(),
                base,
            });
        }
        let mut conditions = Vec::with_capacity(pairs.len());
        for &(digit, count) in &pairs {
            if digit < 0 || digit >= base as i64 {
                return Err(IrwinError::DigitOutOfRange { digit, base });
            }
            let digit = digit as u32;
            if conditions.iter().any(|c: &Condition| c.digit == digit) {
                return Err(IrwinError::DuplicateDigit { digit });
            }
            if count < 0 {
                return Err(IrwinError::NegativeCount { digit, count });
            }
            let count = u32::try_from(count).map_err(|_| IrwinError::TableTooLarge {
                cells: count as u128 + 1,
            })?;
            conditions.push(Condition { digit, count });
        }
        Ok(ConditionSet { base, conditions })
    }

    /// Pairs a digit list with a count list of the same length.
    pub fn from_lists(base: u32, digits: &[i64], counts: &[i64]) -> Result<Self> {
        if digits.len() != counts.len() {
            return Err(IrwinError::LengthMismatch {
                digits: digits.len(),
                counts: counts.len(),
            });
        }
        ConditionSet::new(base, digits.iter().copied().zip(counts.iter().copied()))
    }

    pub fn single(base: u32, digit: i64, count: i64) -> Result<Self> {
        ConditionSet::new(base, [(digit, count)])
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn digits(&self) -> Vec<u32> {
        self.conditions.iter().map(|c| c.digit).collect()
    }

    pub fn counts(&self) -> Vec<u32> {
        self.conditions.iter().map(|c| c.count).collect()
    }

    /// Position of `digit` in the condition list, if it is constrained.
    pub fn position_of(&self, digit: u32) -> Option<usize> {
        self.conditions.iter().position(|c| c.digit == digit)
    }

    pub fn is_finite_series(&self) -> bool {
        self.conditions.len() == self.base as usize
    }

    pub fn is_empty_series(&self) -> bool {
        (1..self.base).all(|d| {
            self.position_of(d)
                .is_some_and(|p| self.conditions[p].count == 0)
        })
    }

    pub fn kind(&self) -> SeriesKind {
        if self.is_empty_series() {
            SeriesKind::Empty
        } else if self.is_finite_series() {
            SeriesKind::Finite {
                max_digits: self.conditions.iter().map(|c| c.count).sum(),
            }
        } else {
            SeriesKind::Infinite
        }
    }

    /// Number of occurrence cells, `prod(count_i + 1)`.
    pub fn cell_count(&self) -> Result<usize> {
        let cells = self
            .conditions
            .iter()
            .fold(1u128, |acc, c| acc.saturating_mul(c.count as u128 + 1));
        if cells > MAX_CELLS as u128 {
            return Err(IrwinError::TableTooLarge { cells });
        }
        Ok(cells as usize)
    }

    /// Mixed-radix place values: `stride[0] = 1`, `stride[c] = prod_{c' < c}(n_c' + 1)`.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = Vec::with_capacity(self.conditions.len());
        let mut place = 1usize;
        for c in &self.conditions {
            strides.push(place);
            place = place.saturating_mul(c.count as usize + 1);
        }
        strides
    }

    /// Zero-based cell index of an occurrence vector.
    pub fn index(&self, vector: &OccurrenceVector) -> Result<usize> {
        let out_of_bounds = || IrwinError::VectorOutOfBounds {
            counts: vector.0.clone(),
            bounds: self.counts(),
        };
        if vector.0.len() != self.conditions.len() {
            return Err(out_of_bounds());
        }
        let mut index = 0usize;
        for ((k, c), stride) in vector.0.iter().zip(&self.conditions).zip(self.strides()) {
            if *k > c.count {
                return Err(out_of_bounds());
            }
            index += *k as usize * stride;
        }
        Ok(index)
    }

    /// Inverse of [`ConditionSet::index`].
    pub fn unindex(&self, index: usize) -> Result<OccurrenceVector> {
        let cells = self.cell_count()?;
        if index >= cells {
            return Err(IrwinError::IndexOutOfBounds { index, cells });
        }
        let mut rest = index;
        let counts = self
            .conditions
            .iter()
            .map(|c| {
                let radix = c.count as usize + 1;
                let k = rest % radix;
                rest /= radix;
                k as u32
            })
            .collect();
        Ok(OccurrenceVector(counts))
    }

    /// Cell holding the requested (exact-count) sum: the all-maximal vector.
    pub fn target_index(&self) -> Result<usize> {
        Ok(self.cell_count()? - 1)
    }
}

/// Occurrence counts `(k_1, .., k_m)` aligned with a condition list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct OccurrenceVector(pub Vec<u32>);

impl OccurrenceVector {
    pub fn counts(&self) -> &[u32] {
        &self.0
    }
}

/// Smallest `D` with `base^D >= 1000`: the digit-length seeded by direct summation.
pub fn direct_sum_digits(base: u32) -> u32 {
    let mut digits = 0;
    let mut reach = 1u64;
    while reach < 1000 {
        reach *= base as u64;
        digits += 1;
    }
    digits
}

/// Rough digit-length at which blocks of integers with `count` occurrences
/// of one digit drop below `10^-exponent`: their share of all `i`-digit
/// integers is about `C(i-1, count) (b-1)^(i-1-count) / b^(i-1)`, which
/// peaks near `i = count * base`.
pub fn decay_digit_lengths(base: u32, count: u32, exponent: u32) -> u32 {
    let b = base as f64;
    let ratio = ((b - 1.0) / b).log10();
    let mut log_binomial = 0.0;
    let mut i = count + 1;
    loop {
        let m = (i - 1) as f64;
        let log_block = log_binomial + m * ratio - count as f64 * (b - 1.0).log10() + (b * b.ln()).log10();
        if (log_block < -(exponent as f64) && i >= count * base) || i >= 10_000_000 {
            return i;
        }
        // C(i, count) = C(i-1, count) * i / (i - count)
        log_binomial += (i as f64).log10() - ((i - count) as f64).log10();
        i += 1;
    }
}

pub const MIN_DECIMALS: u32 = 5;
pub const MIN_GUARD: u32 = 2;

/// Precision and truncation settings for one summation.
#[derive(Debug, Clone)]
pub struct PrecisionPlan {
    pub requested_decimals: u32,
    pub working_decimals: u32,
    /// Decimal scale of stored power-sum values; fine enough that
    /// `tiny_cutoff_hard` sits well above accumulated rounding.
    pub table_scale: u32,
    pub tiny_cutoff_hard: Fixed,
    pub tiny_cutoff_soft: Fixed,
    pub max_power: usize,
    pub max_digit_length: u32,
    pub direct_sum_digits: u32,
}

impl PrecisionPlan {
    pub fn new(conditions: &ConditionSet, requested_decimals: u32) -> Result<Self> {
        Self::with_guard(conditions, requested_decimals, MIN_GUARD)
    }

    pub fn with_guard(conditions: &ConditionSet, requested_decimals: u32, guard: u32) -> Result<Self> {
        let requested_decimals = requested_decimals.max(MIN_DECIMALS);
        let working_decimals = requested_decimals + guard.max(MIN_GUARD);
        // Rounding drift in tiny cells grows with the length of the
        // occurrence chain, so that chain gets extra digits below the cutoff.
        let chain: u64 = conditions.counts().iter().map(|&n| n as u64).sum::<u64>() + 1;
        let table_scale = 2 * working_decimals + 4 + chain.to_string().len() as u32;
        let base = conditions.base();
        let direct = direct_sum_digits(base);
        let max_power = estimate_max_power(base, working_decimals, direct)?;

        let max_count = conditions.counts().into_iter().max().unwrap_or(0);
        let mut max_digit_length = (60 * requested_decimals).max(500);
        if max_count > 10 {
            max_digit_length *= 6;
        }
        let decay = decay_digit_lengths(base, max_count, 2 * working_decimals);
        max_digit_length = max_digit_length.max(decay + decay / 4 + 20);
        Ok(PrecisionPlan {
            requested_decimals,
            working_decimals,
            table_scale,
            tiny_cutoff_hard: Fixed::pow10_neg(2 * working_decimals, table_scale),
            tiny_cutoff_soft: Fixed::pow10_neg(working_decimals + 5, table_scale),
            max_power,
            max_digit_length,
            direct_sum_digits: direct,
        })
    }

    /// Overrides the power truncation (used by truncation-soundness checks).
    pub fn with_max_power(mut self, max_power: usize) -> Self {
        self.max_power = max_power.max(1);
        self
    }

    pub fn with_max_digit_length(mut self, digits: u32) -> Self {
        self.max_digit_length = digits.max(self.direct_sum_digits + 1);
        self
    }
}
