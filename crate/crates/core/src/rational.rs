//! Exact rational scalars.
//!
//! Every probability, correlator and LP coefficient in the crate is a
//! [`Rational`], an arbitrary-precision fraction kept in lowest terms with a
//! positive denominator.

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub use num_rational::BigRational as Rational;

/// `num / den` as a canonical rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Parses `num/den` or a bare integer. Signs are allowed on the numerator
/// only; the result is reduced.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    if den.starts_with(['+', '-']) {
        return None;
    }
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// `(-1)^bit` as a rational sign.
pub(crate) fn sign(bit: u8) -> Rational {
    if bit & 1 == 0 {
        one()
    } else {
        -one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        assert_eq!(parse_rational("2/4"), Some(rat(1, 2)));
        assert_eq!(parse_rational(" -3 "), Some(int(-3)));
        assert_eq!(parse_rational("6/-4"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn display_drops_unit_denominator() {
        assert_eq!(rat(8, 2).to_string(), "4");
        assert_eq!(rat(-40, 18).to_string(), "-20/9");
    }
}
