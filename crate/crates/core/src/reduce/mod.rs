//! Certification oracle for lattice minima.
//!
//! Everything here works on explicit integer bases and never looks at how a
//! weight vector was constructed: kernel lattices get the basis
//! `e_i - s_i e_0`, which is LLL-reduced in exact rational arithmetic and then
//! searched exhaustively for a shortest vector.

mod brute;
mod lll;
mod svp;

pub use brute::minimum_brute;
pub use lll::{gso, is_lll_reduced, lll_reduce, Gso, LllOutput};
pub use svp::{shortest_vector, SvpCertificate, SvpOptions, DEFAULT_SVP_BUDGET};

use num_traits::{One, Zero};

use crate::arith::{det_integer, dot, Integer};
use crate::error::{Error, Result};
use crate::lattice::GramMatrix;

/// Row basis of a lattice in `Z^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    rows: Vec<Vec<Integer>>,
    ambient: usize,
}

impl Basis {
    /// Checks equal row lengths, `rank <= ambient` and linear independence.
    pub fn new(rows: Vec<Vec<Integer>>) -> Result<Self> {
        let ambient = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ambient) {
            return Err(Error::InvalidInput("basis rows differ in length".into()));
        }
        if rows.len() > ambient {
            return Err(Error::InvalidInput(format!(
                "{} rows cannot be independent in Z^{ambient}",
                rows.len()
            )));
        }
        let b = Basis { rows, ambient };
        if det_integer(&b.integer_gram()).is_zero() {
            return Err(Error::InvalidInput("basis rows are linearly dependent".into()));
        }
        Ok(b)
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<Integer>>, ambient: usize) -> Self {
        Basis { rows, ambient }
    }

    pub fn rows(&self) -> &[Vec<Integer>] {
        &self.rows
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// `sum_i coeffs[i] * row_i`.
    pub fn combination(&self, coeffs: &[Integer]) -> Vec<Integer> {
        let mut v = vec![Integer::zero(); self.ambient];
        for (c, row) in coeffs.iter().zip(&self.rows) {
            if c.is_zero() {
                continue;
            }
            for (acc, x) in v.iter_mut().zip(row) {
                *acc += c * x;
            }
        }
        v
    }

    pub fn integer_gram(&self) -> Vec<Vec<Integer>> {
        let n = self.rows.len();
        let mut g = vec![vec![Integer::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = dot(&self.rows[i], &self.rows[j]);
                g[j][i] = v.clone();
                g[i][j] = v;
            }
        }
        g
    }
}

/// Basis `e_i - s_i e_0` (`i = 1..n`) of the kernel of `weights`.
///
/// Any kernel vector `z` equals `sum_{i>=1} z_i (e_i - s_i e_0)` because
/// `z_0 = -sum_{i>=1} s_i z_i`, so these rows span the full kernel.
pub fn kernel_basis(weights: &[Integer]) -> Result<Basis> {
    match weights.first() {
        Some(w) if w.is_one() => {}
        _ => {
            return Err(Error::InvalidInput(
                "kernel basis needs a weight vector with leading entry 1".into(),
            ))
        }
    }
    let m = weights.len();
    let rows = (1..m)
        .map(|i| {
            let mut r = vec![Integer::zero(); m];
            r[0] = -weights[i].clone();
            r[i] = Integer::one();
            r
        })
        .collect();
    Ok(Basis::from_rows_unchecked(rows, m))
}

pub fn gram_of(basis: &Basis) -> GramMatrix {
    GramMatrix::from_integer_unchecked(basis.integer_gram())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterminantCheck {
    pub via_gram: Integer,
    pub via_sum: Integer,
    pub equal: bool,
}

/// Kernel-lattice determinant two ways: exact elimination on the Gram matrix
/// of [`kernel_basis`] and the sum of squared weights.
pub fn determinant_identity_check(weights: &[Integer]) -> Result<DeterminantCheck> {
    let basis = kernel_basis(weights)?;
    let via_gram = det_integer(&basis.integer_gram());
    let via_sum: Integer = weights.iter().map(|w| w * w).sum();
    let equal = via_gram == via_sum;
    Ok(DeterminantCheck {
        via_gram,
        via_sum,
        equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn kernel_basis_examples() {
        let b = kernel_basis(&ints(&[1, 1])).unwrap();
        assert_eq!(b.rows(), &[ints(&[-1, 1])]);
        let b = kernel_basis(&ints(&[1, 2, 3])).unwrap();
        assert_eq!(b.rows(), &[ints(&[-2, 1, 0]), ints(&[-3, 0, 1])]);
        let b = kernel_basis(&ints(&[1, 2, 4, 7])).unwrap();
        assert_eq!(
            b.rows(),
            &[ints(&[-2, 1, 0, 0]), ints(&[-4, 0, 1, 0]), ints(&[-7, 0, 0, 1])]
        );
        let w = ints(&[1, 5, 9, 2]);
        for r in kernel_basis(&w).unwrap().rows() {
            assert!(dot(r, &w).is_zero());
        }
    }

    #[test]
    fn kernel_basis_rejects_bad_leading_weight() {
        assert!(kernel_basis(&ints(&[2, 3])).is_err());
        assert!(kernel_basis(&[]).is_err());
    }

    #[test]
    fn gram_examples() {
        let g = gram_of(&kernel_basis(&ints(&[1, 2, 3])).unwrap());
        assert_eq!(g.to_integer().unwrap(), vec![ints(&[5, 6]), ints(&[6, 10])]);
        let g = gram_of(&kernel_basis(&ints(&[1, 1])).unwrap());
        assert_eq!(g.to_integer().unwrap(), vec![ints(&[2])]);
        let id = Basis::new(vec![ints(&[1, 0]), ints(&[0, 1])]).unwrap();
        assert_eq!(gram_of(&id).to_integer().unwrap(), vec![ints(&[1, 0]), ints(&[0, 1])]);
    }

    #[test]
    fn kernel_gram_has_closed_form() {
        let w = ints(&[1, 4, 6, 11]);
        let g = kernel_basis(&w).unwrap().integer_gram();
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { int(1) } else { int(0) };
                assert_eq!(g[i][j], delta + &w[i + 1] * &w[j + 1]);
            }
        }
    }

    #[test]
    fn determinant_identity_examples() {
        for (w, d) in [(vec![1, 2, 3], 14), (vec![1, 1], 2), (vec![1, 2, 4, 7], 70)] {
            let c = determinant_identity_check(&ints(&w)).unwrap();
            assert_eq!(c.via_gram, int(d));
            assert_eq!(c.via_sum, int(d));
            assert!(c.equal);
        }
    }

    #[test]
    fn basis_validation() {
        assert!(Basis::new(vec![ints(&[1, 2]), ints(&[2, 4])]).is_err());
        assert!(Basis::new(vec![ints(&[1, 2]), ints(&[2])]).is_err());
        assert!(Basis::new(vec![ints(&[1]), ints(&[2])]).is_err());
    }
}
