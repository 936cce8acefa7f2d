//! Exact rational thresholds.
//!
//! Every threshold of the form `c * n` is evaluated as a floor or ceiling of an
//! exact rational, never in floating point.

use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::ParseError;

pub type Rational = Ratio<i64>;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// `floor(r * n)`.
pub fn floor_mul(r: Rational, n: usize) -> i64 {
    let p = r * Rational::from_integer(n as i64);
    p.numer().div_floor(p.denom())
}

/// `ceil(r * n)`.
pub fn ceil_mul(r: Rational, n: usize) -> i64 {
    let p = r * Rational::from_integer(n as i64);
    p.numer().div_ceil(p.denom())
}

/// `floor(r * n)` clamped at zero, for thresholds whose coefficient may be
/// negative at coarse parameters.
pub fn floor_mul_nonneg(r: Rational, n: usize) -> u64 {
    floor_mul(r, n).max(0) as u64
}

/// Parses `num/den` or an integer.
pub fn parse_ratio(text: &str) -> Result<Rational, ParseError> {
    let text = text.trim();
    let parse = |s: &str| i64::from_str(s.trim()).map_err(|_| ParseError::BadNumber(s.to_string()));
    let r = match text.split_once('/') {
        Some((n, d)) => {
            let d = parse(d)?;
            if d == 0 {
                return Err(ParseError::BadNumber(text.to_string()));
            }
            Rational::new(parse(n)?, d)
        }
        None => Rational::from_integer(parse(text)?),
    };
    Ok(r)
}

pub fn format_ratio(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Whether `r` lies strictly inside `(0, 1)`.
pub fn in_unit_interval(r: Rational) -> bool {
    r.is_positive() && r < Rational::one()
}

pub fn is_nonneg(r: Rational) -> bool {
    !r.is_negative() || r.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floors_and_ceilings() {
        assert_eq!(floor_mul(rat(3, 10), 7), 2);
        assert_eq!(ceil_mul(rat(3, 10), 7), 3);
        assert_eq!(floor_mul(rat(-1, 3), 2), -1);
        assert_eq!(ceil_mul(rat(2, 5), 10), 4);
        assert_eq!(floor_mul_nonneg(rat(-4, 15), 100), 0);
    }

    #[test]
    fn parses_fractions() {
        assert_eq!(parse_ratio("1/10").unwrap(), rat(1, 10));
        assert_eq!(parse_ratio("2/4").unwrap(), rat(1, 2));
        assert_eq!(parse_ratio("3").unwrap(), rat(3, 1));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x").is_err());
    }
}
