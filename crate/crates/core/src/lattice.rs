use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{det_rational, Integer, Rational};
use crate::density;
use crate::error::{Error, Result};
use crate::real::HighReal;
use crate::reduce::{self, Basis, SvpCertificate, SvpOptions};

/// Symmetric positive definite matrix with exact rational entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramMatrix {
    entries: Vec<Vec<Rational>>,
}

impl GramMatrix {
    /// Rejects non-square, non-symmetric and non-positive-definite input.
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("Gram matrix must be square and nonempty".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "Gram matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let g = GramMatrix { entries };
        g.ldl()?;
        Ok(g)
    }

    pub fn from_integer(entries: Vec<Vec<Integer>>) -> Result<Self> {
        Self::new(
            entries
                .into_iter()
                .map(|r| r.into_iter().map(Rational::from_integer).collect())
                .collect(),
        )
    }

    pub(crate) fn from_integer_unchecked(entries: Vec<Vec<Integer>>) -> Self {
        GramMatrix {
            entries: entries
                .into_iter()
                .map(|r| r.into_iter().map(Rational::from_integer).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    /// `Some` when every entry is an integer.
    pub fn to_integer(&self) -> Option<Vec<Vec<Integer>>> {
        self.entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|q| q.is_integer().then(|| q.to_integer()))
                    .collect()
            })
            .collect()
    }

    pub fn determinant(&self) -> Rational {
        det_rational(&self.entries)
    }

    /// Exact `G = L1 D L1^t` with `L1` unit lower triangular.
    ///
    /// Fails with the index of the first nonpositive pivot, which is also the
    /// first leading principal minor that is not positive.
    pub fn ldl(&self) -> Result<(Vec<Vec<Rational>>, Vec<Rational>)> {
        let n = self.dim();
        let mut l = vec![vec![Rational::zero(); n]; n];
        let mut d = vec![Rational::zero(); n];
        for j in 0..n {
            let mut dj = self.entries[j][j].clone();
            for k in 0..j {
                dj -= &l[j][k] * &l[j][k] * &d[k];
            }
            if !dj.is_positive() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            l[j][j] = Rational::one();
            for i in j + 1..n {
                let mut v = self.entries[i][j].clone();
                for k in 0..j {
                    v -= &l[i][k] * &l[j][k] * &d[k];
                }
                l[i][j] = v / &dj;
            }
            d[j] = dj;
        }
        Ok((l, d))
    }
}

/// The lattice `{z in Z^{n+1} : <z, weights> = 0}` of dimension `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelLattice {
    weights: Vec<Integer>,
}

impl KernelLattice {
    /// `weights[0]` must be 1 and every weight positive.
    pub fn new(weights: Vec<Integer>) -> Result<Self> {
        match weights.first() {
            Some(w) if w.is_one() => {}
            _ => return Err(Error::InvalidInput("leading weight must be 1".into())),
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::InvalidInput(format!("weight {w} is not positive")));
        }
        Ok(KernelLattice { weights })
    }

    pub fn weights(&self) -> &[Integer] {
        &self.weights
    }

    pub fn dimension(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn basis(&self) -> Basis {
        reduce::kernel_basis(&self.weights).expect("leading weight checked")
    }

    pub fn gram(&self) -> GramMatrix {
        reduce::gram_of(&self.basis())
    }

    /// `sum_k weights[k]^2`.
    pub fn determinant(&self) -> Integer {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn shortest_vector(&self, opts: &SvpOptions) -> Result<SvpCertificate> {
        reduce::shortest_vector(&self.basis(), opts)
    }
}

/// Packing quality of one `n`-dimensional lattice and the reference bounds
/// for its dimension.
#[derive(Clone, Debug)]
pub struct DensityReport {
    pub dimension: u32,
    pub minimum: Integer,
    pub determinant: Integer,
    pub delta: HighReal,
    pub density: HighReal,
    /// Only for mu-sequence lattices.
    pub bound_lower: Option<HighReal>,
    /// `None` for `n < 2`, where `zeta(n)` diverges.
    pub bound_mh: Option<HighReal>,
    pub bound_ball: Option<HighReal>,
}

impl DensityReport {
    pub fn new(dimension: u32, minimum: Integer, determinant: Integer, mu: Option<u64>) -> Self {
        let delta = density::center_density(&minimum, &determinant, dimension);
        let density = density::packing_density(&minimum, &determinant, dimension);
        let (bound_mh, bound_ball) = if dimension >= 2 {
            let (mh, ball) = density::comparison_bounds(dimension);
            (Some(mh), Some(ball))
        } else {
            (None, None)
        };
        DensityReport {
            dimension,
            bound_lower: mu.map(|m| density::density_lower_bound(m, dimension)),
            minimum,
            determinant,
            delta,
            density,
            bound_mh,
            bound_ball,
        }
    }

    /// Certified `density >=` the mu lower bound; `None` without a mu.
    pub fn meets_lower_bound(&self) -> Option<bool> {
        self.bound_lower
            .as_ref()
            .map(|b| b.certainly_le(&self.density))
    }

    pub fn summary(&self) -> DensitySummary {
        DensitySummary {
            dimension: self.dimension,
            minimum: self.minimum.to_string(),
            determinant: self.determinant.to_string(),
            delta: self.delta.to_f64(),
            density: self.density.to_f64(),
            bound_lower: self.bound_lower.as_ref().map(HighReal::to_f64),
            bound_mh: self.bound_mh.as_ref().map(HighReal::to_f64),
            bound_ball: self.bound_ball.as_ref().map(HighReal::to_f64),
        }
    }
}

/// Serializable point values of a [`DensityReport`].
#[derive(Clone, Debug, Serialize)]
pub struct DensitySummary {
    pub dimension: u32,
    pub minimum: String,
    pub determinant: String,
    pub delta: f64,
    pub density: f64,
    pub bound_lower: Option<f64>,
    pub bound_mh: Option<f64>,
    pub bound_ball: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ratio};

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn gram_validation() {
        assert!(GramMatrix::from_integer(vec![ints(&[2, 1]), ints(&[1, 2])]).is_ok());
        assert!(matches!(
            GramMatrix::from_integer(vec![ints(&[1, 2]), ints(&[2, 1])]),
            Err(Error::NotPositiveDefinite { pivot: 1 })
        ));
        assert!(matches!(
            GramMatrix::from_integer(vec![ints(&[0])]),
            Err(Error::NotPositiveDefinite { pivot: 0 })
        ));
        assert!(GramMatrix::from_integer(vec![ints(&[2, 1]), ints(&[0, 2])]).is_err());
        assert!(GramMatrix::new(vec![]).is_err());
    }

    #[test]
    fn ldl_reconstructs() {
        let g = GramMatrix::new(vec![
            vec![ratio(2, 1), ratio(1, 2)],
            vec![ratio(1, 2), ratio(3, 1)],
        ])
        .unwrap();
        let (l, d) = g.ldl().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let v: Rational = (0..2).map(|k| &l[i][k] * &d[k] * &l[j][k]).sum();
                assert_eq!(&v, g.get(i, j));
            }
        }
        assert_eq!(g.determinant(), ratio(23, 4));
    }

    #[test]
    fn kernel_lattice_basics() {
        let k = KernelLattice::new(ints(&[1, 2, 3])).unwrap();
        assert_eq!(k.dimension(), 2);
        assert_eq!(k.determinant(), int(14));
        assert_eq!(k.gram().determinant(), ratio(14, 1));
        let c = k.shortest_vector(&SvpOptions::default()).unwrap();
        assert_eq!(c.minimum, int(3));
        assert!(KernelLattice::new(ints(&[2, 3])).is_err());
        assert!(KernelLattice::new(ints(&[1, 0])).is_err());
    }

    #[test]
    fn density_report_of_hexagonal_lattice() {
        let r = DensityReport::new(2, int(2), int(3), Some(2));
        assert!(r.delta.within(0.288675134594813, 1e-14));
        let v2 = r.density.div(&r.delta);
        assert!(v2.within(std::f64::consts::PI, 1e-14));
        assert_eq!(r.meets_lower_bound(), Some(true));
        assert!(r.bound_mh.is_some());
        let r1 = DensityReport::new(1, int(1), int(1), None);
        assert!(r1.bound_mh.is_none() && r1.meets_lower_bound().is_none());
    }
}
