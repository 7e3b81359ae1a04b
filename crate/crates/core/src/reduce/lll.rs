use num_traits::{Signed, Zero};

use super::Basis;
use crate::arith::{ratio, round_half_up, Integer, Rational};
use crate::error::{Error, Result};

/// Gram-Schmidt data of a basis: `mu[i][j]` for `j < i` and the squared
/// lengths `bstar[i]` of the orthogonalized rows.
#[derive(Clone, Debug)]
pub struct Gso {
    pub mu: Vec<Vec<Rational>>,
    pub bstar: Vec<Rational>,
}

/// Exact GSO from an integer Gram matrix.
pub fn gso(gram: &[Vec<Integer>]) -> Gso {
    let n = gram.len();
    let mut mu = vec![vec![Rational::zero(); n]; n];
    let mut bstar = vec![Rational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut r = Rational::from_integer(gram[i][j].clone());
            for k in 0..j {
                r -= &mu[j][k] * &mu[i][k] * &bstar[k];
            }
            mu[i][j] = r / &bstar[j];
        }
        let mut b = Rational::from_integer(gram[i][i].clone());
        for k in 0..i {
            b -= &mu[i][k] * &mu[i][k] * &bstar[k];
        }
        bstar[i] = b;
    }
    Gso { mu, bstar }
}

#[derive(Clone, Debug)]
pub struct LllOutput {
    pub basis: Basis,
    /// Unimodular `U` with `reduced rows = U * input rows`.
    pub transform: Vec<Vec<Integer>>,
    pub gso: Gso,
}

fn sub_scaled(a: &mut [Integer], b: &[Integer], q: &Integer) {
    for (x, y) in a.iter_mut().zip(b) {
        *x -= q * y;
    }
}

/// LLL reduction in exact rational arithmetic (Cohen, Algorithm 2.6.3).
///
/// `delta` must lie in `(1/4, 1)`.
pub fn lll_reduce(basis: &Basis, delta: &Rational) -> Result<LllOutput> {
    if *delta <= ratio(1, 4) || *delta >= ratio(1, 1) {
        return Err(Error::InvalidInput(format!("LLL delta {delta} outside (1/4, 1)")));
    }
    let n = basis.rank();
    let mut b: Vec<Vec<Integer>> = basis.rows().to_vec();
    let mut h: Vec<Vec<Integer>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Integer::from((i == j) as i32))
                .collect()
        })
        .collect();
    let Gso { mut mu, mut bstar } = gso(&basis.integer_gram());
    let half = ratio(1, 2);

    let size_reduce = |k: usize,
                       l: usize,
                       b: &mut Vec<Vec<Integer>>,
                       h: &mut Vec<Vec<Integer>>,
                       mu: &mut Vec<Vec<Rational>>| {
        if mu[k][l].abs() <= half {
            return;
        }
        let q = round_half_up(&mu[k][l]);
        let (bl, hl) = (b[l].clone(), h[l].clone());
        sub_scaled(&mut b[k], &bl, &q);
        sub_scaled(&mut h[k], &hl, &q);
        let qr = Rational::from_integer(q);
        mu[k][l] -= &qr;
        for i in 0..l {
            let t = &qr * &mu[l][i];
            mu[k][i] -= t;
        }
    };

    let mut k = 1;
    while k < n {
        size_reduce(k, k - 1, &mut b, &mut h, &mut mu);
        let m = mu[k][k - 1].clone();
        if bstar[k] < (delta - &m * &m) * &bstar[k - 1] {
            b.swap(k, k - 1);
            h.swap(k, k - 1);
            for j in 0..k - 1 {
                let t = mu[k][j].clone();
                mu[k][j] = mu[k - 1][j].clone();
                mu[k - 1][j] = t;
            }
            let big_b = &bstar[k] + &m * &m * &bstar[k - 1];
            mu[k][k - 1] = &m * &bstar[k - 1] / &big_b;
            bstar[k] = &bstar[k - 1] * &bstar[k] / &big_b;
            bstar[k - 1] = big_b;
            for i in k + 1..n {
                let t = mu[i][k].clone();
                mu[i][k] = &mu[i][k - 1] - &m * &t;
                mu[i][k - 1] = t + &mu[k][k - 1] * &mu[i][k];
            }
            k = (k - 1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                size_reduce(k, l, &mut b, &mut h, &mut mu);
            }
            k += 1;
        }
    }
    Ok(LllOutput {
        basis: Basis::from_rows_unchecked(b, basis.ambient_dim()),
        transform: h,
        gso: Gso { mu, bstar },
    })
}

/// Size-reduction and Lovász conditions, recomputed from scratch.
pub fn is_lll_reduced(basis: &Basis, delta: &Rational) -> bool {
    let g = gso(&basis.integer_gram());
    let half = ratio(1, 2);
    let n = basis.rank();
    for i in 0..n {
        for j in 0..i {
            if g.mu[i][j].abs() > half {
                return false;
            }
        }
        if i > 0 {
            let m = &g.mu[i][i - 1];
            if g.bstar[i] < (delta - m * m) * &g.bstar[i - 1] {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{det_integer, int, norm};
    use crate::reduce::kernel_basis;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn matmul(u: &[Vec<Integer>], b: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
        u.iter()
            .map(|row| {
                (0..b[0].len())
                    .map(|c| row.iter().zip(b).map(|(x, r)| x * &r[c]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn identity_is_unchanged() {
        let id = Basis::new(vec![ints(&[1, 0, 0]), ints(&[0, 1, 0]), ints(&[0, 0, 1])]).unwrap();
        let out = lll_reduce(&id, &ratio(99, 100)).unwrap();
        assert_eq!(out.basis, id);
    }

    #[test]
    fn size_reduction_shrinks_long_row() {
        let b = Basis::new(vec![ints(&[1, 0]), ints(&[1000, 1])]).unwrap();
        let out = lll_reduce(&b, &ratio(99, 100)).unwrap();
        let max_before = b.rows().iter().map(|r| norm(r)).max().unwrap();
        let max_after = out.basis.rows().iter().map(|r| norm(r)).max().unwrap();
        assert!(max_after <= max_before);
        assert_eq!(max_after, int(1));
    }

    #[test]
    fn kernel_of_123_keeps_determinant() {
        let b = kernel_basis(&ints(&[1, 2, 3])).unwrap();
        let out = lll_reduce(&b, &ratio(99, 100)).unwrap();
        assert_eq!(det_integer(&out.basis.integer_gram()), int(14));
        assert!(is_lll_reduced(&out.basis, &ratio(99, 100)));
    }

    #[test]
    fn rejects_bad_delta() {
        let b = kernel_basis(&ints(&[1, 2])).unwrap();
        assert!(lll_reduce(&b, &ratio(1, 4)).is_err());
        assert!(lll_reduce(&b, &ratio(1, 1)).is_err());
    }

    proptest! {
        #[test]
        fn lll_is_unimodular_and_reduced(w in proptest::collection::vec(1i64..500, 1..7)) {
            let mut weights = vec![int(1)];
            weights.extend(w.iter().map(|&x| int(x)));
            let b = kernel_basis(&weights).unwrap();
            let delta = ratio(99, 100);
            let out = lll_reduce(&b, &delta).unwrap();
            prop_assert!(is_lll_reduced(&out.basis, &delta));
            prop_assert_eq!(matmul(&out.transform, b.rows()), out.basis.rows().to_vec());
            prop_assert_eq!(det_integer(&out.transform).abs(), int(1));
            prop_assert_eq!(det_integer(&out.basis.integer_gram()), det_integer(&b.integer_gram()));
            let fresh = gso(&out.basis.integer_gram());
            prop_assert_eq!(fresh.bstar, out.gso.bstar);
        }
    }
}
