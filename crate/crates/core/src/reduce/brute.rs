use num_integer::Integer as _;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::Integer;
use crate::error::{Error, Result};

struct Scan<'a> {
    weights: &'a [Integer],
    free: Vec<usize>,
    pivot: usize,
    cap: u64,
    best: Option<u64>,
    nodes: u64,
    budget: u64,
}

impl Scan<'_> {
    fn go(&mut self, depth: usize, used: u64, partial: &Integer, nonzero: bool) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::budget("brute-force minimum nodes", self.nodes, self.budget));
        }
        if depth == self.free.len() {
            if !nonzero {
                return Ok(());
            }
            let (q, r) = partial.div_rem(&self.weights[self.pivot]);
            if !r.is_zero() {
                return Ok(());
            }
            let Some(q2) = (&q * &q).to_u64() else {
                return Ok(());
            };
            let total = used + q2;
            if total < self.cap && self.best.is_none_or(|b| total < b) {
                self.best = Some(total);
            }
            return Ok(());
        }
        let left = self.cap - 1 - used;
        let r = (left as f64).sqrt() as i64 + 1;
        let w = &self.weights[self.free[depth]];
        for c in -r..=r {
            let c2 = (c * c) as u64;
            if c2 > left {
                continue;
            }
            let next = partial + w * c;
            self.go(depth + 1, used + c2, &next, nonzero || c != 0)?;
        }
        Ok(())
    }
}

/// Minimum of the kernel lattice of `weights` if it is below `cap`.
///
/// Scans every integer vector of norm `< cap` on all coordinates but one
/// (the one with the largest weight), solving the remaining coordinate from
/// the orthogonality condition. Shares no code with the LLL/enumeration
/// oracle.
pub fn minimum_brute(weights: &[Integer], cap: &Integer, budget: u64) -> Result<Option<Integer>> {
    if !cap.is_positive() {
        return Err(Error::InvalidInput("brute-force cap must be at least 1".into()));
    }
    let Some(cap) = cap.to_u64() else {
        return Err(Error::budget("brute-force cap", cap, budget));
    };
    if weights.is_empty() {
        return Ok(None);
    }
    let pivot = (0..weights.len())
        .max_by(|&a, &b| weights[a].abs().cmp(&weights[b].abs()).then(b.cmp(&a)))
        .expect("nonempty");
    if weights[pivot].is_zero() {
        // every unit vector is in the kernel
        return Ok((cap > 1).then(|| Integer::from(1)));
    }
    let free = (0..weights.len()).filter(|&i| i != pivot).collect();
    let mut scan = Scan {
        weights,
        free,
        pivot,
        cap,
        best: None,
        nodes: 0,
        budget,
    };
    scan.go(0, 0, &Integer::zero(), false)?;
    Ok(scan.best.map(Integer::from))
}
