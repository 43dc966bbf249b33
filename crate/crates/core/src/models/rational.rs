//! Parsing and canonical formatting of `"p/q"` rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::ModelError;

pub type Rational = BigRational;

/// Parses `"p/q"` or a bare integer `"p"`. Whitespace around either part is
/// ignored; the denominator must be nonzero.
pub fn parse_rational(s: &str) -> Result<Rational, ModelError> {
    let bad = || ModelError::BadRational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Canonical lowest-terms form, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    BigRational::new(numer.into(), denom.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_canonicalize() {
        assert_eq!(parse_rational("2/4").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" -3 / 9 ").unwrap(), ratio(-1, 3));
        assert_eq!(parse_rational("1").unwrap(), ratio(1, 1));
        assert_eq!(parse_rational("3/-6").unwrap(), ratio(-1, 2));
        assert_eq!(format_rational(&ratio(0, 5)), "0/1");
        assert_eq!(format_rational(&parse_rational("6/-4").unwrap()), "-3/2");
    }

    #[test]
    fn reject_malformed() {
        for s in ["1/0", "", "a/2", "1/2/3", "0.5"] {
            assert!(parse_rational(s).is_err(), "{s:?} should not parse");
        }
    }
}
