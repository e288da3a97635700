//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(k: usize) -> Q {
    (1..=k as i64).fold(Q::one(), |acc, i| acc * q(i))
}

/// Parses `p`, `-p` or `p/q` with integers of any size. Decimal points and
/// exponents are rejected so that no floating point value ever leaks in.
pub fn parse_rational(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if s.contains(['.', 'e', 'E']) {
        return Err(format!("float literal `{s}` is not allowed, use p/q"));
    }
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| format!("bad rational `{s}`"))?;
    let d: BigInt = den.parse().map_err(|_| format!("bad rational `{s}`"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Q::new(n, d))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn is_neg(x: &Q) -> bool {
    x.is_negative()
}

/// Sign of a permutation given as a slice of distinct keys (counts inversions).
pub fn perm_sign<T: Ord>(xs: &[T]) -> i32 {
    let mut inv = 0usize;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[i] > xs[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("3").unwrap(), q(3));
        assert_eq!(parse_rational("-1/2").unwrap(), qf(-1, 2));
        assert_eq!(parse_rational(" 4/6 ").unwrap(), qf(2, 3));
    }

    #[test]
    fn rejects_floats_and_zero_denominators() {
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn formats_round_trip() {
        for s in ["0", "7", "-3/5", "12345678901234567890/7"] {
            assert_eq!(fmt_q(&parse_rational(s).unwrap()), s);
        }
    }

    #[test]
    fn permutation_sign() {
        assert_eq!(perm_sign(&[1, 2, 3]), 1);
        assert_eq!(perm_sign(&[2, 1, 3]), -1);
        assert_eq!(perm_sign(&[3, 1, 2]), 1);
    }
}
