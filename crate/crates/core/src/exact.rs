//! Exact numbers: big rationals and powers of √2.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `base^exp` for a non-negative exponent.
pub fn pow(base: &Rational, exp: usize) -> Rational {
    num_traits::pow(base.clone(), exp)
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float (every finite `f64` is dyadic).
pub fn from_f64(value: f64) -> Result<Rational, Error> {
    Rational::from_float(value).ok_or_else(|| Error::Parse(format!("non-finite number {value}")))
}

/// "p/q" or "p" when the denominator is one.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Parses "p/q", an integer, or a finite decimal such as "0.75" or "1e-4" exactly.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = text.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (
            &text[..pos],
            text[pos + 1..].parse::<i32>().map_err(|_| bad())?,
        ),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    let scale = exponent - frac.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= pow(&ten, scale as usize);
    } else {
        value /= pow(&ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// The number `2^(half_exponent / 2)`, kept exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SqrtTwoPower {
    pub half_exponent: i64,
}

impl SqrtTwoPower {
    pub fn new(half_exponent: i64) -> Self {
        Self { half_exponent }
    }

    /// Rational value when the exponent is an integer.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.half_exponent % 2 != 0 {
            return None;
        }
        let e = self.half_exponent / 2;
        let two = int(2);
        Some(if e >= 0 {
            pow(&two, e as usize)
        } else {
            Rational::one() / pow(&two, (-e) as usize)
        })
    }

    pub fn to_f64(&self) -> f64 {
        2f64.powf(self.half_exponent as f64 / 2.0)
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.half_exponent + other.half_exponent)
    }

    pub fn div(self, other: Self) -> Self {
        Self::new(self.half_exponent - other.half_exponent)
    }

    /// Compares against a non-negative rational without rounding:
    /// `2^(h/2)` vs `r` is decided by comparing `2^h` with `r^2`.
    pub fn cmp_rational(&self, value: &Rational) -> std::cmp::Ordering {
        if value.is_negative() {
            return std::cmp::Ordering::Greater;
        }
        let squared = value * value;
        let two = int(2);
        let lhs = if self.half_exponent >= 0 {
            pow(&two, self.half_exponent as usize)
        } else {
            Rational::one() / pow(&two, (-self.half_exponent) as usize)
        };
        lhs.cmp(&squared)
    }
}

impl fmt::Display for SqrtTwoPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) => f.write_str(&format_rational(&r)),
            None => write!(f, "2^({}/2)", self.half_exponent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("0.75").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("1e-4").unwrap(), rat(1, 10_000));
        assert_eq!(parse_rational("2.5E1").unwrap(), int(25));
        assert_eq!(parse_rational("1").unwrap(), int(1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formats_rationals() {
        assert_eq!(format_rational(&rat(54, 64)), "27/32");
        assert_eq!(format_rational(&int(4)), "4");
    }

    #[test]
    fn sqrt_two_powers() {
        assert_eq!(SqrtTwoPower::new(2).as_rational(), Some(int(2)));
        assert_eq!(SqrtTwoPower::new(-2).as_rational(), Some(rat(1, 2)));
        assert_eq!(SqrtTwoPower::new(3).as_rational(), None);
        assert_eq!(SqrtTwoPower::new(3).to_string(), "2^(3/2)");
        assert!((SqrtTwoPower::new(-3).to_f64() - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert_eq!(
            SqrtTwoPower::new(3).cmp_rational(&int(3)),
            std::cmp::Ordering::Less
        );
        assert_eq!(
            SqrtTwoPower::new(3).cmp_rational(&rat(14, 5)),
            std::cmp::Ordering::Greater
        );
    }
}
