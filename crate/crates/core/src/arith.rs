//! Exact scalars shared by every module.
//!
//! `Integer` and `Rational` are the arbitrary-precision types from `num`;
//! rationals are always kept in lowest terms with a positive denominator.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Integer = BigInt;
pub type Rational = BigRational;

pub fn int(v: i64) -> Integer {
    Integer::from(v)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(int(n), int(d))
}

/// Nearest integer, halves rounded toward +infinity.
pub fn round_half_up(x: &Rational) -> Integer {
    (x + ratio(1, 2)).floor().to_integer()
}

pub fn ceil(x: &Rational) -> Integer {
    x.ceil().to_integer()
}

/// Largest `r` with `r*r <= n`; `n` must be nonnegative.
pub fn isqrt(n: &Integer) -> Integer {
    assert!(!n.is_negative(), "isqrt of a negative integer");
    n.sqrt()
}

pub fn parse_integer(s: &str) -> Result<Integer> {
    s.trim()
        .parse::<Integer>()
        .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))
}

/// Parses `p/q`, a plain integer, or a terminating decimal such as `0.125`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("not a decimal: {s:?}")));
        }
        let digits = parse_integer(&format!("{whole}{frac}"))?;
        let scale = num_traits::pow(Integer::from(10), frac.len());
        return Ok(Rational::new(digits, scale));
    }
    match s.split_once('/') {
        Some((p, q)) => {
            let p = parse_integer(p)?;
            let q = parse_integer(q)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(parse_integer(s)?)),
    }
}

pub fn dot(a: &[Integer], b: &[Integer]) -> Integer {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[Integer]) -> Integer {
    dot(a, a)
}

/// Exact determinant of a square rational matrix by Gaussian elimination.
pub fn det_rational(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    det
}

/// Exact determinant of an integer matrix (fraction-free Bareiss elimination).
pub fn det_integer(m: &[Vec<Integer>]) -> Integer {
    let n = m.len();
    if n == 0 {
        return Integer::one();
    }
    let mut a: Vec<Vec<Integer>> = m.to_vec();
    let mut sign = Integer::one();
    let mut prev = Integer::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return Integer::zero();
            };
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v.div_floor(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rounding_ties_go_up() {
        assert_eq!(round_half_up(&ratio(5, 2)), int(3));
        assert_eq!(round_half_up(&ratio(-5, 2)), int(-2));
        assert_eq!(round_half_up(&ratio(7, 3)), int(2));
        assert_eq!(round_half_up(&ratio(-7, 3)), int(-2));
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" -4 ").unwrap(), ratio(-4, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(parse_rational("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("2.50").unwrap(), ratio(5, 2));
        assert!(parse_rational("1.").is_err());
        assert!(parse_rational("1.2e3").is_err());
    }

    #[test]
    fn determinants_agree() {
        let m = vec![vec![int(5), int(6)], vec![int(6), int(10)]];
        assert_eq!(det_integer(&m), int(14));
        let q: Vec<Vec<Rational>> = m
            .iter()
            .map(|r| r.iter().cloned().map(Rational::from_integer).collect())
            .collect();
        assert_eq!(det_rational(&q), ratio(14, 1));
        let z = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert_eq!(det_integer(&z), int(-1));
    }

    proptest! {
        #[test]
        fn integer_ops_match_native_i128(a in any::<i64>(), b in any::<i64>(), c in any::<i64>()) {
            // 128-bit results from 64-bit operands never overflow i128.
            let (x, y, z) = (int(a), int(b), int(c));
            let (a, b, c) = (a as i128, b as i128, c as i128);
            prop_assert_eq!(&x * &y + &z, Integer::from(a * b + c));
            prop_assert_eq!(&x * &y - &z * &x, Integer::from(a * b - c * a));
            if b != 0 {
                prop_assert_eq!((&x * &z).div_floor(&y), Integer::from(num_integer::Integer::div_floor(&(a * c), &b)));
            }
        }

        #[test]
        fn rational_reduction_is_idempotent(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = ratio(n, d);
            let again = Rational::new(r.numer().clone(), r.denom().clone());
            prop_assert_eq!(&again, &r);
            prop_assert!(r.denom().is_positive());
            prop_assert!(r.numer().gcd(r.denom()).is_one() || r.numer().is_zero());
        }

        #[test]
        fn bareiss_matches_rational_elimination(entries in proptest::collection::vec(-20i64..20, 16)) {
            let m: Vec<Vec<Integer>> = entries.chunks(4).map(|r| r.iter().map(|&v| int(v)).collect()).collect();
            let q: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().cloned().map(Rational::from_integer).collect()).collect();
            prop_assert_eq!(Rational::from_integer(det_integer(&m)), det_rational(&q));
        }
    }
}
