//! Integer vectors of bounded norm in the standard lattice `Z^n`.
//!
//! Enumeration is a coordinate-by-coordinate descent, first coordinate
//! outermost, with the remaining norm budget pruning each level. Output order
//! is lexicographic (ascending) on coordinates. Before starting, the number of
//! vectors is predicted from the ball-volume bound and compared to a budget.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::Integer;
use crate::density::ball_count_bound;
use crate::error::{Error, Result};
use crate::real::HighReal;

pub const DEFAULT_ENUM_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Every `z != 0` with `|z|^2 <= B`.
    Full,
    /// One of each `{z, -z}`: the one whose first nonzero coordinate is positive.
    Half,
}

fn isqrt_u64(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// Checks the predicted number of lattice points against `budget`.
pub fn check_budget(n: usize, bound: u64, budget: u64) -> Result<()> {
    let predicted = ball_count_bound(n as u32, bound);
    if HighReal::from_integer(&BigInt::from(budget)).certainly_lt(&predicted) {
        return Err(Error::budget(
            "predicted short-vector count",
            format!("{:.3e}", predicted.to_f64()),
            budget,
        ));
    }
    Ok(())
}

fn bound_u64(bound: &Integer, n: usize, budget: u64) -> Result<u64> {
    if bound.sign() == num_bigint::Sign::Minus {
        return Err(Error::InvalidInput("norm bound must be nonnegative".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    bound
        .to_u64()
        .filter(|&b| b < 1 << 62)
        .ok_or_else(|| Error::budget("norm bound", bound, budget))
}

/// Iterator over short vectors in lexicographic order.
#[derive(Clone, Debug)]
pub struct ShortVectorStream {
    mode: Mode,
    z: Vec<i64>,
    /// `rem[i]`: norm still available to coordinates `i..`.
    rem: Vec<u64>,
    /// `zero[i]`: coordinates `0..i` are all zero.
    zero: Vec<bool>,
    started: bool,
    done: bool,
}

impl ShortVectorStream {
    fn new(n: usize, bound: u64, mode: Mode) -> Self {
        let mut rem = vec![0; n + 1];
        rem[0] = bound;
        let mut zero = vec![true; n + 1];
        zero[0] = true;
        ShortVectorStream {
            mode,
            z: vec![0; n],
            rem,
            zero,
            started: false,
            done: false,
        }
    }

    fn low(&self, i: usize) -> i64 {
        if self.mode == Mode::Half && self.zero[i] {
            0
        } else {
            -(isqrt_u64(self.rem[i]) as i64)
        }
    }

    fn high(&self, i: usize) -> i64 {
        isqrt_u64(self.rem[i]) as i64
    }

    fn set(&mut self, i: usize, v: i64) {
        self.z[i] = v;
        self.rem[i + 1] = self.rem[i] - (v * v) as u64;
        self.zero[i + 1] = self.zero[i] && v == 0;
    }

    fn descend(&mut self, from: usize) {
        for i in from..self.z.len() {
            let v = self.low(i);
            self.set(i, v);
        }
    }

    fn advance(&mut self) -> bool {
        let mut i = self.z.len();
        while i > 0 {
            i -= 1;
            if self.z[i] < self.high(i) {
                let v = self.z[i] + 1;
                self.set(i, v);
                self.descend(i + 1);
                return true;
            }
        }
        false
    }
}

impl Iterator for ShortVectorStream {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        let mut ok = if self.started {
            self.advance()
        } else {
            self.started = true;
            self.descend(0);
            true
        };
        while ok {
            if !self.zero[self.z.len()] {
                return Some(self.z.clone());
            }
            ok = self.advance();
        }
        self.done = true;
        None
    }
}

/// All `z in Z^n` with `0 < |z|^2 <= bound`, per `mode`.
pub fn enumerate_short(n: usize, bound: &Integer, mode: Mode, budget: u64) -> Result<ShortVectorStream> {
    let b = bound_u64(bound, n, budget)?;
    check_budget(n, b, budget)?;
    Ok(ShortVectorStream::new(n, b, mode))
}

/// `#{z in Z^n : |z|^2 <= mu}`, zero vector included.
///
/// Computed from the coefficients of `(sum_j x^{j^2})^n` truncated at degree
/// `mu`, which shares nothing with the enumeration above.
pub fn count_norm_le(n: usize, mu: &Integer) -> Result<Integer> {
    let mu = bound_u64(mu, n, u64::MAX)?;
    let len = mu as usize + 1;
    let mut theta = vec![Integer::zero(); len];
    let mut j = 0u64;
    while j * j <= mu {
        theta[(j * j) as usize] += if j == 0 { 1 } else { 2 };
        j += 1;
    }
    let mut acc = vec![Integer::zero(); len];
    acc[0] = Integer::from(1);
    for _ in 0..n {
        let mut next = vec![Integer::zero(); len];
        for (a, ca) in acc.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in theta.iter().enumerate().take(len - a) {
                if !cb.is_zero() {
                    next[a + b] += ca * cb;
                }
            }
        }
        acc = next;
    }
    Ok(acc.into_iter().sum())
}

/// Running dot product carried down the enumeration tree.
pub trait DotAccumulator: Clone + Send + Sync {
    fn origin() -> Self;
    fn add_scaled(&self, weight: &Self, c: i64) -> Self;
}

impl DotAccumulator for i128 {
    fn origin() -> Self {
        0
    }
    fn add_scaled(&self, weight: &Self, c: i64) -> Self {
        self + weight * c as i128
    }
}

impl DotAccumulator for Integer {
    fn origin() -> Self {
        Integer::zero()
    }
    fn add_scaled(&self, weight: &Self, c: i64) -> Self {
        if c == 0 {
            self.clone()
        } else {
            self + weight * c
        }
    }
}

struct Walker<'a, T, A, F> {
    weights: &'a [T],
    z: Vec<i64>,
    acc: A,
    visit: &'a F,
}

impl<T, A, F> Walker<'_, T, A, F>
where
    T: DotAccumulator,
    F: Fn(&mut A, &[i64], u64, &T) -> Result<()>,
{
    fn walk(&mut self, i: usize, rem: u64, used: u64, dot: &T, zero_prefix: bool, half: bool) -> Result<()> {
        if i == self.z.len() {
            if !zero_prefix {
                (self.visit)(&mut self.acc, &self.z, used, dot)?;
            }
            return Ok(());
        }
        let r = isqrt_u64(rem) as i64;
        let lo = if half && zero_prefix { 0 } else { -r };
        for v in lo..=r {
            let v2 = (v * v) as u64;
            self.z[i] = v;
            let next = dot.add_scaled(&self.weights[i], v);
            self.walk(i + 1, rem - v2, used + v2, &next, zero_prefix && v == 0, half)?;
        }
        self.z[i] = 0;
        Ok(())
    }
}

/// Folds `visit(acc, z, |z|^2, <z, weights>)` over every short vector, with
/// the dot product updated incrementally along the tree.
///
/// Branches on the first coordinate run in parallel; their accumulators are
/// combined with `merge` in ascending branch order, so the result does not
/// depend on scheduling.
pub fn fold_with_dot<T, A, I, F, M>(
    weights: &[T],
    bound: &Integer,
    mode: Mode,
    budget: u64,
    init: I,
    visit: F,
    merge: M,
) -> Result<A>
where
    T: DotAccumulator,
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &[i64], u64, &T) -> Result<()> + Sync,
    M: Fn(A, A) -> A,
{
    let n = weights.len();
    let b = bound_u64(bound, n, budget)?;
    check_budget(n, b, budget)?;
    let half = mode == Mode::Half;
    let r = isqrt_u64(b) as i64;
    let lo = if half { 0 } else { -r };
    let branches: Vec<Result<A>> = (lo..=r)
        .into_par_iter()
        .map(|v| {
            let v2 = (v * v) as u64;
            let mut z = vec![0; n];
            z[0] = v;
            let mut w = Walker {
                weights,
                z,
                acc: init(),
                visit: &visit,
            };
            let dot = T::origin().add_scaled(&weights[0], v);
            w.walk(1, b - v2, v2, &dot, v == 0, half)?;
            Ok(w.acc)
        })
        .collect();
    let mut out = init();
    for br in branches {
        out = merge(out, br?);
    }
    Ok(out)
}
