use std::cmp::Ordering;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::lll::lll_reduce;
use super::Basis;
use crate::arith::{norm, ratio, round_half_up, Integer, Rational};
use crate::error::{Error, Result};

pub const DEFAULT_SVP_BUDGET: u64 = 100_000_000;

#[derive(Clone, Debug)]
pub struct SvpOptions {
    /// Maximum number of enumeration-tree nodes.
    pub node_budget: u64,
    pub delta: Rational,
}

impl Default for SvpOptions {
    fn default() -> Self {
        SvpOptions {
            node_budget: DEFAULT_SVP_BUDGET,
            delta: ratio(99, 100),
        }
    }
}

impl SvpOptions {
    pub fn with_budget(node_budget: u64) -> Self {
        SvpOptions {
            node_budget,
            ..Default::default()
        }
    }
}

/// Exact lattice minimum together with a vector attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SvpCertificate {
    #[serde(serialize_with = "crate::sequence::ser_integer")]
    pub minimum: Integer,
    /// The shortest vector in ambient coordinates.
    #[serde(serialize_with = "crate::sequence::ser_integers")]
    pub witness: Vec<Integer>,
    /// Coefficients of `witness` with respect to the input basis.
    #[serde(serialize_with = "crate::sequence::ser_integers")]
    pub coefficients: Vec<Integer>,
    pub nodes_visited: u64,
}

struct Search<'a> {
    mu: &'a [Vec<Rational>],
    bstar: &'a [Rational],
    radius: Rational,
    best: Vec<Integer>,
    x: Vec<Integer>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn visit(&mut self, i: usize, partial: &Rational, zero_above: bool) -> Result<()> {
        let n = self.x.len();
        let mut center = Rational::zero();
        for j in i + 1..n {
            if !self.x[j].is_zero() {
                center -= &self.mu[j][i] * Rational::from_integer(self.x[j].clone());
            }
        }
        let start = round_half_up(&center);
        // upward from the rounded center, then downward
        for upward in [true, false] {
            let mut xi = if upward { start.clone() } else { &start - 1 };
            loop {
                if zero_above && xi.is_negative() {
                    break;
                }
                let d = Rational::from_integer(xi.clone()) - &center;
                let dist = &d * &d * &self.bstar[i] + partial;
                if dist > self.radius {
                    break;
                }
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::budget("SVP enumeration nodes", self.nodes, self.budget));
                }
                self.x[i] = xi.clone();
                let still_zero = zero_above && xi.is_zero();
                if i == 0 {
                    if !still_zero {
                        self.leaf(dist);
                    }
                } else {
                    self.visit(i - 1, &dist, still_zero)?;
                }
                if upward {
                    xi += 1;
                } else {
                    xi -= 1;
                }
            }
        }
        self.x[i] = Integer::zero();
        Ok(())
    }

    fn leaf(&mut self, dist: Rational) {
        match dist.cmp(&self.radius) {
            Ordering::Less => {
                self.radius = dist;
                self.best = self.x.clone();
            }
            Ordering::Equal if self.x < self.best => self.best = self.x.clone(),
            _ => {}
        }
    }
}

/// Exact shortest nonzero vector by LLL preprocessing and exhaustive
/// Schnorr-Euchner style enumeration with exact rational pruning.
///
/// The enumeration only visits one of each pair `+-x` (topmost nonzero
/// coefficient positive). Among vectors of minimal norm, the one whose
/// coefficient vector on the reduced basis is lexicographically smallest is
/// returned.
pub fn shortest_vector(basis: &Basis, opts: &SvpOptions) -> Result<SvpCertificate> {
    let n = basis.rank();
    if n == 0 {
        return Err(Error::InvalidInput("shortest vector of the zero lattice".into()));
    }
    let red = lll_reduce(basis, &opts.delta)?;
    let rows = red.basis.rows();

    let (k0, r0) = rows
        .iter()
        .map(|r| norm(r))
        .enumerate()
        .min_by(|a, b| a.1.cmp(&b.1))
        .expect("nonempty basis");
    let mut start = vec![Integer::zero(); n];
    start[k0] = Integer::from(1);

    let mut search = Search {
        mu: &red.gso.mu,
        bstar: &red.gso.bstar,
        radius: Rational::from_integer(r0),
        best: start,
        x: vec![Integer::zero(); n],
        nodes: 0,
        budget: opts.node_budget,
    };
    search.visit(n - 1, &Rational::zero(), true)?;

    let witness = red.basis.combination(&search.best);
    let minimum = norm(&witness);
    debug_assert_eq!(Rational::from_integer(minimum.clone()), search.radius);
    let coefficients = (0..n)
        .map(|c| {
            search
                .best
                .iter()
                .zip(&red.transform)
                .map(|(x, row)| x * &row[c])
                .sum()
        })
        .collect();
    Ok(SvpCertificate {
        minimum,
        witness,
        coefficients,
        nodes_visited: search.nodes,
    })
}
