//! Certified real enclosures.
//!
//! A [`HighReal`] is a closed interval `[lo, hi]` of 128-bit binary floats that
//! is guaranteed to contain the exact value it stands for. Every arithmetic
//! step rounds the lower end down and the upper end up, so a comparison such as
//! [`HighReal::certainly_le`] can only succeed when it holds for the exact
//! quantities.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use num_bigint::{BigUint, Sign as IntSign};
use num_traits::Zero;

use crate::arith::{Integer, Rational};

const PREC: usize = 128;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

fn cmp(a: &BigFloat, b: &BigFloat) -> Ordering {
    match a.cmp(b) {
        Some(x) if x < 0 => Ordering::Less,
        Some(0) => Ordering::Equal,
        Some(_) => Ordering::Greater,
        None => panic!("NaN in certified arithmetic"),
    }
}

fn min_of(v: &[BigFloat]) -> BigFloat {
    v.iter()
        .min_by(|a, b| cmp(a, b))
        .expect("nonempty")
        .clone()
}

fn max_of(v: &[BigFloat]) -> BigFloat {
    v.iter()
        .max_by(|a, b| cmp(a, b))
        .expect("nonempty")
        .clone()
}

/// Moves `x` outward by a few ulps. Used after transcendental evaluations
/// whose directed rounding is not relied upon.
fn nudge(x: &BigFloat, up: bool) -> BigFloat {
    if x.is_zero() {
        return x.clone();
    }
    let mut eps = x.abs();
    let e = eps.exponent().expect("finite");
    eps.set_exponent(e - (PREC as i32 - 4));
    if up {
        x.add(&eps, PREC, RoundingMode::Up)
    } else {
        x.sub(&eps, PREC, RoundingMode::Down)
    }
}

fn float_from_integer(v: &Integer, rm: RoundingMode) -> BigFloat {
    if v.is_zero() {
        return BigFloat::from_u8(0, PREC);
    }
    let (sign, mag) = v.clone().into_parts();
    let digits = mag.to_u64_digits();
    let words: Vec<Word> = digits.iter().map(|&d| d as Word).collect();
    let sign = if sign == IntSign::Minus { Sign::Neg } else { Sign::Pos };
    let e = (64 * words.len()) as i32;
    let mut f = BigFloat::from_words(&words, sign, e);
    if words.len() * 64 > PREC {
        f.set_precision(PREC, rm).expect("precision");
    }
    f
}

/// Exact conversion of an integer-valued float.
fn float_to_integer(x: &BigFloat) -> Integer {
    if x.is_zero() {
        return Integer::zero();
    }
    let (m, _, s, e, _) = x.as_raw_parts().expect("finite");
    let mut mag = BigUint::zero();
    for (i, &w) in m.iter().enumerate() {
        mag += BigUint::from(w) << (64 * i);
    }
    let shift = e as i64 - 64 * m.len() as i64;
    let mag = if shift >= 0 {
        mag << shift as usize
    } else {
        mag >> (-shift) as usize
    };
    let v = Integer::from(mag);
    if s == Sign::Neg {
        -v
    } else {
        v
    }
}

fn ldexp(mut f: f64, mut k: i64) -> f64 {
    while k > 1000 {
        f *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        f *= 2f64.powi(-1000);
        k += 1000;
    }
    f * 2f64.powi(k as i32)
}

fn float_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (m, _, s, e, _) = x.as_raw_parts().expect("finite");
    let top = *m.last().expect("mantissa");
    let f = ldexp(top as f64, e as i64 - 64);
    if s == Sign::Neg {
        -f
    } else {
        f
    }
}

#[derive(Clone)]
pub struct HighReal {
    lo: BigFloat,
    hi: BigFloat,
}

impl HighReal {
    pub const MANTISSA_BITS: usize = PREC;

    fn new(lo: BigFloat, hi: BigFloat) -> Self {
        debug_assert!(cmp(&lo, &hi) != Ordering::Greater);
        HighReal { lo, hi }
    }

    pub fn from_integer(v: &Integer) -> Self {
        Self::new(
            float_from_integer(v, RoundingMode::Down),
            float_from_integer(v, RoundingMode::Up),
        )
    }

    pub fn from_i64(v: i64) -> Self {
        let f = BigFloat::from_i64(v, PREC);
        Self::new(f.clone(), f)
    }

    /// Exact for every finite `v`.
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite input");
        let f = BigFloat::from_f64(v, PREC);
        Self::new(f.clone(), f)
    }

    pub fn from_rational(q: &Rational) -> Self {
        Self::from_integer(q.numer()).div(&Self::from_integer(q.denom()))
    }

    pub fn zero() -> Self {
        Self::from_i64(0)
    }

    pub fn one() -> Self {
        Self::from_i64(1)
    }

    pub fn pi() -> Self {
        with_consts(|cc| {
            let lo = cc.pi(PREC, RoundingMode::Down);
            let hi = cc.pi(PREC, RoundingMode::Up);
            Self::new(nudge(&lo, false), nudge(&hi, true))
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.lo.add(&o.lo, PREC, RoundingMode::Down),
            self.hi.add(&o.hi, PREC, RoundingMode::Up),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(
            self.lo.sub(&o.hi, PREC, RoundingMode::Down),
            self.hi.sub(&o.lo, PREC, RoundingMode::Up),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.hi.neg(), self.lo.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let pairs = [
            (&self.lo, &o.lo),
            (&self.lo, &o.hi),
            (&self.hi, &o.lo),
            (&self.hi, &o.hi),
        ];
        let downs: Vec<_> = pairs
            .iter()
            .map(|(a, b)| a.mul(b, PREC, RoundingMode::Down))
            .collect();
        let ups: Vec<_> = pairs
            .iter()
            .map(|(a, b)| a.mul(b, PREC, RoundingMode::Up))
            .collect();
        Self::new(min_of(&downs), max_of(&ups))
    }

    /// Panics if `o` contains zero.
    pub fn recip(&self) -> Self {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an interval containing zero"
        );
        let one = BigFloat::from_u8(1, PREC);
        Self::new(
            one.div(&self.hi, PREC, RoundingMode::Down),
            one.div(&self.lo, PREC, RoundingMode::Up),
        )
    }

    pub fn div(&self, o: &Self) -> Self {
        if cmp(&o.lo, &o.hi) == Ordering::Equal && cmp(&self.lo, &self.hi) == Ordering::Equal {
            // point / point: one correctly rounded division per end
            assert!(!o.lo.is_zero(), "division by zero");
            return Self::new(
                self.lo.div(&o.lo, PREC, RoundingMode::Down),
                self.hi.div(&o.hi, PREC, RoundingMode::Up),
            );
        }
        self.mul(&o.recip())
    }

    pub fn mul_int(&self, k: i64) -> Self {
        self.mul(&Self::from_i64(k))
    }

    pub fn div_int(&self, k: i64) -> Self {
        self.div(&Self::from_i64(k))
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Like `mul(self)` but knows the result is nonnegative.
    pub fn square(&self) -> Self {
        let lo_abs = self.lo.abs();
        let hi_abs = self.hi.abs();
        let (small, big) = if cmp(&lo_abs, &hi_abs) == Ordering::Greater {
            (hi_abs, lo_abs)
        } else {
            (lo_abs, hi_abs)
        };
        let lo = if self.lo.is_negative() && self.hi.is_positive() {
            BigFloat::from_u8(0, PREC)
        } else {
            small.mul(&small, PREC, RoundingMode::Down)
        };
        Self::new(lo, big.mul(&big, PREC, RoundingMode::Up))
    }

    /// Panics if the enclosure lies entirely below zero; a lower end slightly
    /// below zero is clamped.
    pub fn sqrt(&self) -> Self {
        assert!(!self.hi.is_negative(), "sqrt of a negative enclosure");
        let lo = if self.lo.is_negative() {
            BigFloat::from_u8(0, PREC)
        } else {
            nudge(&self.lo.sqrt(PREC, RoundingMode::Down), false)
        };
        let hi = nudge(&self.hi.sqrt(PREC, RoundingMode::Up), true);
        let lo = if lo.is_negative() {
            BigFloat::from_u8(0, PREC)
        } else {
            lo
        };
        Self::new(lo, hi)
    }

    pub fn exp(&self) -> Self {
        with_consts(|cc| {
            let lo = self.lo.exp(PREC, RoundingMode::Down, cc);
            let hi = self.hi.exp(PREC, RoundingMode::Up, cc);
            let lo = nudge(&lo, false);
            let lo = if lo.is_negative() {
                BigFloat::from_u8(0, PREC)
            } else {
                lo
            };
            Self::new(lo, nudge(&hi, true))
        })
    }

    /// Smallest enclosure containing both.
    pub fn hull(&self, o: &Self) -> Self {
        Self::new(
            min_of(&[self.lo.clone(), o.lo.clone()]),
            max_of(&[self.hi.clone(), o.hi.clone()]),
        )
    }

    /// Widens the upper end by `extra >= 0`.
    pub fn add_upper_slack(&self, extra: &Self) -> Self {
        Self::new(self.lo.clone(), self.hi.add(&extra.hi, PREC, RoundingMode::Up))
    }

    pub fn lower(&self) -> HighReal {
        Self::new(self.lo.clone(), self.lo.clone())
    }

    pub fn upper(&self) -> HighReal {
        Self::new(self.hi.clone(), self.hi.clone())
    }

    /// An `f64` no larger than the exact value.
    pub fn lower_f64(&self) -> f64 {
        float_to_f64(&self.lo).next_down()
    }

    /// An `f64` no smaller than the exact value.
    pub fn upper_f64(&self) -> f64 {
        float_to_f64(&self.hi).next_up()
    }

    /// Nearest-style point estimate (midpoint of the enclosure).
    pub fn to_f64(&self) -> f64 {
        let a = float_to_f64(&self.lo);
        let b = float_to_f64(&self.hi);
        a + (b - a) / 2.0
    }

    pub fn width_f64(&self) -> f64 {
        float_to_f64(&self.hi.sub(&self.lo, PREC, RoundingMode::Up))
    }

    /// `true` only if every value in `self` is `<=` every value in `o`.
    pub fn certainly_le(&self, o: &Self) -> bool {
        cmp(&self.hi, &o.lo) != Ordering::Greater
    }

    pub fn certainly_lt(&self, o: &Self) -> bool {
        cmp(&self.hi, &o.lo) == Ordering::Less
    }

    pub fn certainly_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn contains(&self, x: f64) -> bool {
        let f = BigFloat::from_f64(x, PREC);
        cmp(&self.lo, &f) != Ordering::Greater && cmp(&f, &self.hi) != Ordering::Greater
    }

    /// Every value of the enclosure is within `tol` of `x`.
    pub fn within(&self, x: f64, tol: f64) -> bool {
        let t = HighReal::from_f64(x);
        let d = self.sub(&t);
        HighReal::from_f64(-tol).certainly_le(&d) && d.certainly_le(&HighReal::from_f64(tol))
    }

    /// `ceil` of the upper end.
    pub fn ceil_upper(&self) -> Integer {
        float_to_integer(&self.hi.ceil())
    }

    /// `floor` of the lower end.
    pub fn floor_lower(&self) -> Integer {
        float_to_integer(&self.lo.floor())
    }

    /// `floor` of the upper end.
    pub fn floor_upper(&self) -> Integer {
        float_to_integer(&self.hi.floor())
    }

    pub fn max(&self, o: &Self) -> Self {
        Self::new(
            max_of(&[self.lo.clone(), o.lo.clone()]),
            max_of(&[self.hi.clone(), o.hi.clone()]),
        )
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.lo.is_negative()
    }
}

impl fmt::Debug for HighReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lower_f64(), self.upper_f64())
    }
}

impl fmt::Display for HighReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_real(self.to_f64()))
    }
}

/// Fixed CSV rendering: ten significant digits, scientific outside `[1e-4, 1e10)`.
pub fn format_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".to_string()
    } else if (1e-4..1e10).contains(&a) {
        let digits = 9 - a.log10().floor() as i32;
        format!("{:.*}", digits.max(0) as usize, x)
    } else {
        format!("{x:.9e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ratio};
    use proptest::prelude::*;

    #[test]
    fn pi_enclosure_is_tight() {
        let p = HighReal::pi();
        assert!(p.contains(std::f64::consts::PI) || p.within(std::f64::consts::PI, 1e-15));
        assert!(p.width_f64() < 1e-35);
    }

    #[test]
    fn integers_round_trip_exactly() {
        let big: Integer = "123456789012345678901234567890123456789012345".parse().unwrap();
        let h = HighReal::from_integer(&big);
        assert!(h.floor_lower() <= big && big <= h.ceil_upper());
        let small = int(-98765);
        let h = HighReal::from_integer(&small);
        assert_eq!(h.floor_lower(), small);
        assert_eq!(h.ceil_upper(), small);
        assert_eq!(h.to_f64(), -98765.0);
    }

    #[test]
    fn rational_enclosure() {
        let h = HighReal::from_rational(&ratio(1, 3));
        assert!(h.within(1.0 / 3.0, 1e-16));
        assert!(h.width_f64() < 1e-36);
    }

    #[test]
    fn exp_and_sqrt() {
        let e = HighReal::pi().neg().exp();
        assert!(e.within(0.043213918263772250, 1e-15));
        let r = HighReal::from_i64(2).sqrt();
        assert!(r.within(std::f64::consts::SQRT_2, 1e-15));
        assert!(r.square().certainly_le(&HighReal::from_f64(2.000000000001)));
    }

    #[test]
    fn comparisons_are_conservative() {
        let third = HighReal::from_rational(&ratio(1, 3));
        let also = HighReal::from_i64(1).div_int(3);
        assert!(!third.certainly_lt(&also));
        assert!(third.certainly_lt(&HighReal::from_rational(&ratio(1000001, 3000000))));
    }

    #[test]
    fn formatting_is_stable() {
        assert_eq!(format_real(9.42477796076938), "9.424777961");
        assert_eq!(format_real(0.5), "0.5000000000");
        assert_eq!(format_real(1.5e-7), "1.500000000e-7");
    }

    proptest! {
        #[test]
        fn arithmetic_encloses_f64(a in -1e6f64..1e6, b in 1e-3f64..1e6) {
            let (x, y) = (HighReal::from_f64(a), HighReal::from_f64(b));
            prop_assert!(x.add(&y).within(a + b, 1e-9 * (a.abs() + b)));
            prop_assert!(x.mul(&y).within(a * b, 1e-9 * (a * b).abs().max(1e-300)));
            prop_assert!(x.div(&y).within(a / b, 1e-9 * (a / b).abs().max(1e-300)));
            prop_assert!(y.sqrt().within(b.sqrt(), 1e-12 * b.sqrt()));
        }
    }
}
