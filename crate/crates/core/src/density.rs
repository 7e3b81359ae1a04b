//! Ball volumes, packing densities and the closed-form bounds attached to
//! mu-sequence lattices.
//!
//! Every quantity is returned as a [`HighReal`] enclosure. Expressions are
//! arranged so that the only inexact steps are a final square root, powers of
//! `pi` and (for the theta series) exponentials; everything else is exact
//! rational arithmetic.

use num_bigint::BigInt;
use num_traits::One;

use crate::arith::{int, ratio, Integer, Rational};
use crate::real::HighReal;

/// `V_n = coeff * pi^power` exactly.
///
/// Even `n = 2m`: `pi^m / m!`. Odd `n = 2m + 1`: `2^{m+1} pi^m / (2m+1)!!`,
/// from `Gamma(m + 3/2) = (2m+1)!! sqrt(pi) / 2^{m+1}`.
pub fn ball_volume_parts(n: u32) -> (Rational, u32) {
    let m = n / 2;
    if n % 2 == 0 {
        let fact: BigInt = (1..=m as u64).map(BigInt::from).product();
        (Rational::new(BigInt::one(), fact), m)
    } else {
        let dfact: BigInt = (0..=m as u64).map(|k| BigInt::from(2 * k + 1)).product();
        (Rational::new(BigInt::one() << (m + 1), dfact), m)
    }
}

fn pi_pow(k: u32) -> HighReal {
    HighReal::pi().powi(k)
}

/// Volume of the unit ball in dimension `n`, `pi^{n/2} / (n/2)!`.
pub fn unit_ball_volume(n: u32) -> HighReal {
    let (c, k) = ball_volume_parts(n);
    HighReal::from_rational(&c).mul(&pi_pow(k))
}

/// `sqrt(q) * V_n` with `q >= 0` rational, evaluated with a single square root.
fn sqrt_times_volume(q: &Rational, n: u32) -> HighReal {
    let (c, k) = ball_volume_parts(n);
    HighReal::from_rational(&(q * &c * &c)).sqrt().mul(&pi_pow(k))
}

/// `sqrt(min^n / (4^n det))`.
pub fn center_density(minimum: &Integer, determinant: &Integer, n: u32) -> HighReal {
    let q = Rational::new(
        num_traits::pow(minimum.clone(), n as usize),
        determinant * (BigInt::one() << (2 * n)),
    );
    HighReal::from_rational(&q).sqrt()
}

/// `center_density * V_n`.
pub fn packing_density(minimum: &Integer, determinant: &Integer, n: u32) -> HighReal {
    let q = Rational::new(
        num_traits::pow(minimum.clone(), n as usize),
        determinant * (BigInt::one() << (2 * n)),
    );
    sqrt_times_volume(&q, n)
}

fn quarter_shift(base: i64, n: u32) -> Rational {
    // base + n/4
    Rational::new(int(4 * base + n as i64), int(4))
}

/// The two growth bounds for the `n`-th term:
/// `1 + sqrt(mu-2) sqrt(mu-1+n/4)^n V_n` and `sqrt(mu) sqrt(mu+n/4)^n V_n`.
pub fn growth_bounds(mu: u64, n: u32) -> (HighReal, HighReal) {
    assert!(mu >= 2, "mu must be at least 2");
    let mu = mu as i64;
    let x1 = num_traits::pow(quarter_shift(mu - 1, n), n as usize);
    let first = HighReal::one().add(&sqrt_times_volume(&(x1 * int(mu - 2)), n));
    let x2 = num_traits::pow(quarter_shift(mu, n), n as usize);
    let second = sqrt_times_volume(&(x2 * int(mu)), n);
    (first, second)
}

/// `(1 + n/(4 mu))^{-n/2} / (2^n sqrt((n+1) mu))`.
pub fn density_lower_bound(mu: u64, n: u32) -> HighReal {
    assert!(mu >= 2, "mu must be at least 2");
    let mu = mu as i64;
    let base = Rational::new(int(4 * mu), int(4 * mu + n as i64));
    let q = num_traits::pow(base, n as usize)
        / Rational::from_integer((BigInt::one() << (2 * n)) * int((n as i64 + 1) * mu));
    HighReal::from_rational(&q).sqrt()
}

/// `2 sqrt(mu + n/4)^n V_n`, the volume bound on `#{z in Z^n : |z|^2 <= mu}`.
pub fn ball_count_bound(n: u32, mu: u64) -> HighReal {
    let x = num_traits::pow(quarter_shift(mu as i64, n), n as usize);
    sqrt_times_volume(&x, n).mul_int(2)
}

/// Number of series terms used by [`zeta`].
pub const ZETA_TERMS: u64 = 2048;

/// Certified `zeta(n)` for `n >= 2` from the first `terms` terms.
///
/// The tail `T = sum_{k>K} k^{-n}` is enclosed by the trapezoid and midpoint
/// comparisons for the convex decreasing `x^{-n}`:
/// `K^{1-n}/(n-1) - K^{-n}/2 <= T <= (K+1/2)^{1-n}/(n-1)`.
pub fn zeta_with_terms(n: u32, terms: u64) -> HighReal {
    assert!(n >= 2, "zeta(n) diverges for n < 2");
    assert!(terms >= 1);
    let mut partial = HighReal::zero();
    for k in 1..=terms {
        let kn = num_traits::pow(BigInt::from(k), n as usize);
        partial = partial.add(&HighReal::from_integer(&kn).recip());
    }
    let kk = Rational::from_integer(BigInt::from(terms));
    let nm1 = Rational::from_integer(int(n as i64 - 1));
    let lower = num_traits::pow(kk.clone(), n as usize - 1).recip() / &nm1
        - num_traits::pow(kk.clone(), n as usize).recip() / int(2);
    let upper = num_traits::pow(kk + ratio(1, 2), n as usize - 1).recip() / &nm1;
    let lo = partial.add(&HighReal::from_rational(&lower));
    let hi = partial.add(&HighReal::from_rational(&upper));
    lo.lower().hull(&hi.upper())
}

pub fn zeta(n: u32) -> HighReal {
    zeta_with_terms(n, ZETA_TERMS)
}

/// Minkowski-Hlawka `zeta(n) 2^{1-n}` and Ball `2 (n-1) 2^{-n} zeta(n)`.
pub fn comparison_bounds(n: u32) -> (HighReal, HighReal) {
    assert!(n >= 2, "comparison bounds need n >= 2");
    let z = zeta(n);
    let two_n = HighReal::from_integer(&(BigInt::one() << n));
    let mh = z.mul_int(2).div(&two_n);
    let ball = z.mul_int(2 * (n as i64 - 1)).div(&two_n);
    (mh, ball)
}

/// Terms of `sum_{k>=1} e^{-k^2 pi}` are kept while they are at least this.
pub const THETA_CUTOFF: f64 = 1e-30;

fn theta_term(k: u64) -> HighReal {
    HighReal::pi().mul_int(-((k * k) as i64)).exp()
}

/// Number of terms kept by the `1e-30` truncation rule.
pub fn theta_default_terms() -> u64 {
    let cutoff = HighReal::from_f64(THETA_CUTOFF);
    let mut k = 1;
    while !theta_term(k + 1).certainly_lt(&cutoff) {
        k += 1;
    }
    k
}

/// `sum_{k=1}^{terms} e^{-k^2 pi}` without tail.
pub fn theta_partial_sum(terms: u64) -> HighReal {
    (1..=terms).fold(HighReal::zero(), |acc, k| acc.add(&theta_term(k)))
}

/// Certified enclosure of `sum_{k>=1} e^{-k^2 pi}`: the truncated sum plus
/// the geometric tail bound `e^{-(K+1)^2 pi} / (1 - e^{-pi})` on the upper end.
pub fn theta_series() -> HighReal {
    let k = theta_default_terms();
    let partial = theta_partial_sum(k);
    let tail = theta_term(k + 1).div(&HighReal::one().sub(&theta_term(1)));
    partial.add_upper_slack(&tail)
}

/// `1 / sum_{k>=1} e^{-k^2 pi}`, approximately 23.1388.
pub fn theta_reciprocal() -> HighReal {
    theta_series().recip()
}

#[derive(Clone, Debug)]
pub struct VnRatio {
    /// `sqrt(n) V_n / V_{n-1}`
    pub exact: HighReal,
    /// `sqrt(2 pi) (1 - 1/(4n))`
    pub approx: HighReal,
    pub residual: HighReal,
}

pub fn vn_ratio_check(n: u32) -> VnRatio {
    assert!(n >= 1);
    let (cn, kn) = ball_volume_parts(n);
    let (cm, km) = ball_volume_parts(n - 1);
    let r = cn / cm;
    let exact = HighReal::from_rational(&(&r * &r * int(n as i64)))
        .sqrt()
        .mul(&pi_pow(kn - km));
    let approx = HighReal::pi()
        .mul_int(2)
        .sqrt()
        .mul(&HighReal::from_rational(&(Rational::one() - ratio(1, 4 * n as i64))));
    let residual = exact.sub(&approx);
    VnRatio {
        exact,
        approx,
        residual,
    }
}

#[derive(Clone, Debug)]
pub struct BoundsRow {
    pub n: u32,
    pub mu: u64,
    pub volume: HighReal,
    pub lower_bound: HighReal,
    /// `None` for `n = 1`, where `zeta(n)` diverges.
    pub mh: Option<HighReal>,
    pub ball: Option<HighReal>,
    pub constant_over_2n: HighReal,
}

/// `mu ~ n^2/4`, never below 2.
pub fn default_mu_for(n: u32) -> u64 {
    ((n as u64 * n as u64 + 2) / 4).max(2)
}

pub fn bounds_row(n: u32, mu: u64) -> BoundsRow {
    let (mh, ball) = if n >= 2 {
        let (a, b) = comparison_bounds(n);
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    BoundsRow {
        n,
        mu,
        volume: unit_ball_volume(n),
        lower_bound: density_lower_bound(mu, n),
        mh,
        ball,
        constant_over_2n: theta_reciprocal().div(&HighReal::from_integer(&(BigInt::one() << n))),
    }
}
