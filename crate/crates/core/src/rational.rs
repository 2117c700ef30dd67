//! Helpers for exact rationals and their `"num/den"` string form.

use num::{BigInt, BigRational, Signed, ToPrimitive};

use crate::error::{Error, Result};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Always `"num/den"`, also for integers (`"3/1"`).
pub fn fmt_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"num/den"` or a plain integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = n.parse().map_err(|_| bad())?;
    let den: BigInt = d.parse().map_err(|_| bad())?;
    if den == BigInt::from(0) {
        return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

pub fn to_f64(q: &BigRational) -> f64 {
    // ratio of large integers can overflow each side separately
    q.to_f64().unwrap_or_else(|| {
        let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(900);
        let n = (q.numer().abs() >> shift).to_f64().unwrap_or(f64::MAX);
        let d = (q.denom() >> shift).to_f64().unwrap_or(f64::MAX);
        if q.is_negative() {
            -n / d
        } else {
            n / d
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_form() {
        assert_eq!(fmt_rational(&int(3)), "3/1");
        assert_eq!(fmt_rational(&rat(-2, 6)), "-1/3");
        assert_eq!(parse_rational("-1/3").unwrap(), rat(-1, 3));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn float_conversion() {
        assert_eq!(to_f64(&rat(1, 4)), 0.25);
        let huge = BigRational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399));
        assert!((to_f64(&huge) - 10.0).abs() < 1e-12);
    }
}
