//! Fixed-point decimal numbers: an arbitrary-precision integer mantissa
//! scaled by `10^-scale`.
//!
//! Addition and subtraction are exact (the result takes the larger scale).
//! Every operation that can lose digits (`rescale` to a smaller scale,
//! `from_ratio`, `mul_rounded`) rounds half to even.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// `10^exp` as a big integer.
pub fn pow10(exp: u32) -> BigInt {
    BigInt::from(10u32).pow(exp)
}

/// `num / den` rounded half to even. `den` must be positive.
pub fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    debug_assert!(den.is_positive());
    let (q, r) = num.div_mod_floor(den);
    let twice: BigInt = r << 1;
    match twice.cmp(den) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fixed {
    mantissa: BigInt,
    scale: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid decimal literal {0:?}")]
pub struct ParseFixedError(pub String);

impl Fixed {
    pub fn new(mantissa: BigInt, scale: u32) -> Self {
        Fixed { mantissa, scale }
    }

    pub fn zero(scale: u32) -> Self {
        Fixed::new(BigInt::zero(), scale)
    }

    pub fn from_integer(value: impl Into<BigInt>, scale: u32) -> Self {
        Fixed::new(value.into() * pow10(scale), scale)
    }

    /// `num / den` rounded to `scale` decimals. Panics if `den` is zero.
    pub fn from_ratio(num: &BigInt, den: &BigInt, scale: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num.clone(), den.clone())
        };
        Fixed::new(round_div(&(num * pow10(scale)), &den), scale)
    }

    /// `10^-exp` at the given scale (zero if it is below half an ulp).
    pub fn pow10_neg(exp: u32, scale: u32) -> Self {
        Fixed::from_ratio(&BigInt::one(), &pow10(exp), scale)
    }

    /// One unit in the last place at `scale`.
    pub fn ulp(scale: u32) -> Self {
        Fixed::new(BigInt::one(), scale)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn into_mantissa(self) -> BigInt {
        self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn abs(&self) -> Self {
        Fixed::new(self.mantissa.abs(), self.scale)
    }

    /// Value at a different scale; rounds half to even when digits are dropped.
    pub fn rescale(&self, scale: u32) -> Self {
        match scale.cmp(&self.scale) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => Fixed::new(&self.mantissa * pow10(scale - self.scale), scale),
            Ordering::Less => Fixed::new(
                round_div(&self.mantissa, &pow10(self.scale - scale)),
                scale,
            ),
        }
    }

    pub fn mul_rounded(&self, other: &Fixed, scale: u32) -> Fixed {
        let raw = &self.mantissa * &other.mantissa;
        let raw_scale = self.scale + other.scale;
        Fixed::new(raw, raw_scale).rescale(scale)
    }

    pub fn to_f64(&self) -> f64 {
        // Good enough for diagnostics; exact comparisons never go through f64.
        let digits = self.mantissa.to_string();
        let text = format!("{}e-{}", digits, self.scale);
        text.parse().unwrap_or(f64::NAN)
    }

    /// The value as an integer, if it has no fractional part.
    pub fn to_integer(&self) -> Option<BigInt> {
        let (q, r) = self.mantissa.div_rem(&pow10(self.scale));
        r.is_zero().then_some(q)
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_integer().and_then(|v| v.to_i64())
    }

    fn aligned(&self, other: &Fixed) -> (BigInt, BigInt, u32) {
        let scale = self.scale.max(other.scale);
        let a = if self.scale == scale {
            self.mantissa.clone()
        } else {
            &self.mantissa * pow10(scale - self.scale)
        };
        let b = if other.scale == scale {
            other.mantissa.clone()
        } else {
            &other.mantissa * pow10(scale - other.scale)
        };
        (a, b, scale)
    }

    /// Renders the value with its fractional digits split into groups of
    /// five separated by spaces, e.g. `23.10344 79094 20541 61603`.
    pub fn grouped(&self) -> String {
        let plain = self.to_string();
        match plain.split_once('.') {
            None => plain,
            Some((int_part, frac)) => {
                let groups: Vec<&str> = frac
                    .as_bytes()
                    .chunks(5)
                    .map(|c| std::str::from_utf8(c).expect("ascii digits"))
                    .collect();
                format!("{}.{}", int_part, groups.join(" "))
            }
        }
    }
}

impl PartialEq for Fixed {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Fixed {}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fixed {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.scale == other.scale {
            return self.mantissa.cmp(&other.mantissa);
        }
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, rhs: &Fixed) -> Fixed {
        let (a, b, scale) = self.aligned(rhs);
        Fixed::new(a + b, scale)
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        &self + &rhs
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, rhs: &Fixed) -> Fixed {
        let (a, b, scale) = self.aligned(rhs);
        Fixed::new(a - b, scale)
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        &self - &rhs
    }
}

impl AddAssign<&Fixed> for Fixed {
    fn add_assign(&mut self, rhs: &Fixed) {
        if self.scale == rhs.scale {
            self.mantissa += &rhs.mantissa;
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&Fixed> for Fixed {
    fn sub_assign(&mut self, rhs: &Fixed) {
        if self.scale == rhs.scale {
            self.mantissa -= &rhs.mantissa;
        } else {
            *self = &*self - rhs;
        }
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed::new(-self.mantissa, self.scale)
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.mantissa.magnitude().to_str_radix(10);
        let sign = if self.mantissa.sign() == Sign::Minus { "-" } else { "" };
        let scale = self.scale as usize;
        if scale == 0 {
            return write!(f, "{sign}{digits}");
        }
        let padded = if digits.len() <= scale {
            format!("{}{}", "0".repeat(scale + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac) = padded.split_at(padded.len() - scale);
        write!(f, "{sign}{int_part}.{frac}")
    }
}

impl FromStr for Fixed {
    type Err = ParseFixedError;

    /// Parses `[+-]digits[.digits]` exactly; the scale is the number of
    /// fractional digits written.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseFixedError(s.to_string());
        let trimmed = s.trim();
        let (negative, body) = match trimmed.as_bytes().first() {
            Some(b'-') => (true, &trimmed[1..]),
            Some(b'+') => (false, &trimmed[1..]),
            _ => (false, trimmed),
        };
        let (int_part, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac.is_empty() {
            return Err(err());
        }
        if !int_part.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let joined = format!("{int_part}{frac}");
        let mut mantissa: BigInt = joined.parse().map_err(|_| err())?;
        if negative {
            mantissa = -mantissa;
        }
        Ok(Fixed::new(mantissa, frac.len() as u32))
    }
}

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Fixed {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fx(s: &str) -> Fixed {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(fx("22.92067661926415034816").to_string(), "22.92067661926415034816");
        assert_eq!(fx("-0.05").to_string(), "-0.05");
        assert_eq!(fx("23").to_string(), "23");
        assert_eq!(fx(".5").to_string(), "0.5");
        assert_eq!(fx("0.000054406219429099091465").scale(), 24);
        assert!("1e5".parse::<Fixed>().is_err());
        assert!("".parse::<Fixed>().is_err());
        assert!("1.2.3".parse::<Fixed>().is_err());
    }

    #[test]
    fn round_half_even() {
        assert_eq!(fx("2.5").rescale(0), fx("2"));
        assert_eq!(fx("3.5").rescale(0), fx("4"));
        assert_eq!(fx("-2.5").rescale(0), fx("-2"));
        assert_eq!(fx("-2.51").rescale(0), fx("-3"));
        assert_eq!(fx("1.96875").rescale(4), fx("1.9688"));
        assert_eq!(fx("0.125").rescale(2), fx("0.12"));
    }

    #[test]
    fn ratio() {
        let third = Fixed::from_ratio(&BigInt::from(1), &BigInt::from(3), 5);
        assert_eq!(third.to_string(), "0.33333");
        let v = Fixed::from_ratio(&BigInt::from(761), &BigInt::from(280), 12);
        assert_eq!(v.to_string(), "2.717857142857");
        let neg = Fixed::from_ratio(&BigInt::from(2), &BigInt::from(-3), 3);
        assert_eq!(neg.to_string(), "-0.667");
    }

    #[test]
    fn cross_scale_compare() {
        assert_eq!(fx("2.000"), fx("2"));
        assert!(fx("1.9999") < fx("2"));
        assert_eq!((&fx("1.5") + &fx("0.25")).to_string(), "1.75");
        assert_eq!((&fx("1") - &fx("0.001")).to_string(), "0.999");
    }

    #[test]
    fn grouped_format() {
        assert_eq!(fx("23.10344790942054161603").grouped(), "23.10344 79094 20541 61603");
        assert_eq!(fx("1.6066951524").grouped(), "1.60669 51524");
        assert_eq!(fx("7").grouped(), "7");
    }

    proptest! {
        #[test]
        fn display_round_trips(m in any::<i128>(), scale in 0u32..40) {
            let v = Fixed::new(BigInt::from(m), scale);
            let back: Fixed = v.to_string().parse().unwrap();
            prop_assert_eq!(back.mantissa(), v.mantissa());
            prop_assert_eq!(back.scale(), v.scale());
        }

        #[test]
        fn rescale_error_at_most_half_ulp(m in any::<i64>(), from in 0u32..20, drop in 0u32..20) {
            let v = Fixed::new(BigInt::from(m), from + drop);
            let r = v.rescale(from);
            let diff = (&r - &v).abs();
            let half = Fixed::new(BigInt::from(5), from + 1);
            prop_assert!(diff <= half);
        }
    }
}
