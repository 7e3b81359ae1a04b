//! Approximating a positive definite Gram matrix by a kernel lattice.
//!
//! Write `G = L L^t`, round `kappa L` to an integer matrix `L~`, append a
//! superdiagonal of ones to get `B` (n x (n+1)), and take the integer vector
//! `v` with `B v = 0`, `v[0] = 1`. The rows of `B` span the kernel lattice of
//! `s = |v|` up to signs, and `B B^t / kappa^2 -> G`.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{det_integer, isqrt, parse_integer, parse_rational, Integer, Rational};
use crate::error::{Error, Result};
use crate::lattice::{DensityReport, GramMatrix, KernelLattice};
use crate::real::{format_real, HighReal};
use crate::reduce::SvpOptions;
use crate::sequence::{ser_integer, ser_integers};

/// Real lower-triangular `L` with `L L^t = G`.
pub fn cholesky(g: &GramMatrix) -> Result<Vec<Vec<HighReal>>> {
    let (l1, d) = g.ldl()?;
    let roots: Vec<HighReal> = d.iter().map(|dj| HighReal::from_rational(dj).sqrt()).collect();
    Ok(l1
        .iter()
        .enumerate()
        .map(|(i, row)| {
            (0..row.len())
                .map(|j| {
                    if j > i {
                        HighReal::zero()
                    } else {
                        HighReal::from_rational(&row[j]).mul(&roots[j])
                    }
                })
                .collect()
        })
        .collect())
}

fn ceil_sqrt(x: &Rational) -> Integer {
    let c = x.ceil().to_integer();
    let u = isqrt(&c);
    if &u * &u < c {
        u + 1
    } else {
        u
    }
}

/// `floor(c sqrt(d) + 1/2)` for rational `c` and `d >= 0`, exactly.
fn round_scaled_root(c: &Rational, d: &Rational) -> Integer {
    let four_q = c * c * d * Rational::from_integer(4.into());
    if !c.is_negative() {
        // largest m with (2m - 1)^2 <= 4q
        let t: Integer = isqrt(&four_q.floor().to_integer()) + 1;
        t.div_floor(&Integer::from(2))
    } else {
        // -m is the smallest p >= 0 with (2p + 1)^2 >= 4q
        -(ceil_sqrt(&four_q).div_floor(&Integer::from(2)))
    }
}

/// `kappa L` rounded entrywise to the nearest integer, halves toward +inf.
pub fn round_factor(g: &GramMatrix, kappa: &Integer) -> Result<Vec<Vec<Integer>>> {
    let (l1, d) = g.ldl()?;
    let k = Rational::from_integer(kappa.clone());
    Ok(l1
        .iter()
        .enumerate()
        .map(|(i, row)| {
            (0..row.len())
                .map(|j| {
                    if j > i {
                        Integer::zero()
                    } else {
                        round_scaled_root(&(&k * &row[j]), &d[j])
                    }
                })
                .collect()
        })
        .collect())
}

/// `b[i][j] = l~[i][j]` for `j <= i`, `1` for `j = i + 1`, `0` otherwise.
pub fn build_b(l_rounded: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let n = l_rounded.len();
    (0..n)
        .map(|i| {
            (0..=n)
                .map(|j| match j {
                    j if j <= i => l_rounded[i][j].clone(),
                    j if j == i + 1 => Integer::one(),
                    _ => Integer::zero(),
                })
                .collect()
        })
        .collect()
}

/// Forward substitution: `v[0] = 1`, `v[i+1] = -sum_{j <= i} b[i][j] v[j]`.
pub fn kernel_vector(b: &[Vec<Integer>]) -> Vec<Integer> {
    let mut v = vec![Integer::one()];
    for (i, row) in b.iter().enumerate() {
        let s: Integer = (0..=i).map(|j| &row[j] * &v[j]).sum();
        v.push(-s);
    }
    v
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxResult {
    #[serde(serialize_with = "ser_integer")]
    pub kappa: Integer,
    #[serde(skip)]
    pub l: Vec<Vec<HighReal>>,
    #[serde(skip)]
    pub l_rounded: Vec<Vec<Integer>>,
    #[serde(skip)]
    pub b: Vec<Vec<Integer>>,
    #[serde(serialize_with = "ser_integers")]
    pub v: Vec<Integer>,
    #[serde(serialize_with = "ser_integers")]
    pub s: Vec<Integer>,
    /// `max |(B B^t)[i][j] / kappa^2 - G[i][j]|`, exact.
    #[serde(serialize_with = "ser_rational")]
    pub error: Rational,
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl ApproxResult {
    pub fn bv_is_zero(&self) -> bool {
        self.b
            .iter()
            .all(|row| row.iter().zip(&self.v).map(|(a, b)| a * b).sum::<Integer>().is_zero())
    }

    /// `|l~ - kappa L| <= 1/2 + 2^-40` entrywise, certified.
    pub fn rounding_invariant_holds(&self) -> bool {
        let k = HighReal::from_integer(&self.kappa);
        let margin = HighReal::from_rational(&(Rational::new(1.into(), 2.into())
            + Rational::new(1.into(), Integer::one() << 40u32)));
        self.l.iter().zip(&self.l_rounded).all(|(lr, rr)| {
            lr.iter().zip(rr).all(|(x, r)| {
                let diff = HighReal::from_integer(r).sub(&k.mul(x));
                diff.certainly_le(&margin) && diff.neg().certainly_le(&margin)
            })
        })
    }

    /// The rows of `B` span the whole kernel lattice of `v`:
    /// `det(B B^t) = sum v_i^2`.
    pub fn is_saturated(&self) -> bool {
        let n = self.b.len();
        let gram: Vec<Vec<Integer>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.b[i].iter().zip(&self.b[j]).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect();
        det_integer(&gram) == self.s.iter().map(|x| x * x).sum::<Integer>()
    }
}

/// The full pipeline at scale `kappa`.
pub fn approximate(g: &GramMatrix, kappa: &Integer) -> Result<ApproxResult> {
    if !kappa.is_positive() {
        return Err(Error::InvalidInput(format!("kappa = {kappa} must be positive")));
    }
    let l = cholesky(g)?;
    let l_rounded = round_factor(g, kappa)?;
    let b = build_b(&l_rounded);
    let v = kernel_vector(&b);
    let s = v.iter().map(Signed::abs).collect();
    let k2 = Rational::from_integer(kappa * kappa);
    let n = g.dim();
    let mut error = Rational::zero();
    for i in 0..n {
        for j in 0..n {
            let bb: Integer = b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum();
            let e = (Rational::from_integer(bb) / &k2 - g.get(i, j)).abs();
            if e > error {
                error = e;
            }
        }
    }
    Ok(ApproxResult {
        kappa: kappa.clone(),
        l,
        l_rounded,
        b,
        v,
        s,
        error,
    })
}

/// One `kappa` of a sweep. Lattice failures (budget, zero weights) land in
/// `status` instead of aborting the sweep.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub result: ApproxResult,
    pub saturated: bool,
    pub density: std::result::Result<DensityReport, String>,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "kappa,error,determinant,minimum,center_density,density,saturated,status";

    pub fn csv_row(&self) -> String {
        let r = &self.result;
        let det: Integer = r.s.iter().map(|x| x * x).sum();
        let (min, delta, dens, status) = match &self.density {
            Ok(d) => (
                d.minimum.to_string(),
                format_real(d.delta.to_f64()),
                format_real(d.density.to_f64()),
                "OK".to_string(),
            ),
            Err(e) => (String::new(), String::new(), String::new(), e.clone()),
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            r.kappa,
            format_real(rational_to_f64(&r.error)),
            det,
            min,
            delta,
            dens,
            self.saturated,
            status
        )
    }
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    HighReal::from_rational(q).to_f64()
}

fn lattice_density(s: &[Integer], opts: &SvpOptions) -> std::result::Result<DensityReport, String> {
    let lat = KernelLattice::new(s.to_vec()).map_err(|e| format!("INPUT: {e}"))?;
    let cert = lat.shortest_vector(opts).map_err(|e| match e {
        Error::BudgetExceeded { .. } => format!("BUDGET: {e}"),
        other => other.to_string(),
    })?;
    Ok(DensityReport::new(lat.dimension() as u32, cert.minimum, lat.determinant(), None))
}

/// Runs [`approximate`] for each `kappa` (strictly increasing) and measures
/// the kernel lattice of each resulting `s`.
pub fn convergence_sweep(g: &GramMatrix, kappas: &[Integer], opts: &SvpOptions) -> Result<Vec<SweepRow>> {
    if kappas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("kappas must be strictly increasing".into()));
    }
    kappas
        .par_iter()
        .map(|k| {
            let result = approximate(g, k)?;
            let saturated = result.is_saturated();
            let density = lattice_density(&result.s, opts);
            Ok(SweepRow {
                result,
                saturated,
                density,
            })
        })
        .collect()
}

/// Plain-text Gram matrix: `n` on the first line, then `n` rows of
/// whitespace-separated entries (`p/q` or integers). `#` starts a comment.
pub fn parse_gram(text: &str) -> Result<GramMatrix> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let n = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Gram file".into()))
        .and_then(parse_integer)?;
    let n: usize = (&n)
        .try_into()
        .map_err(|_| Error::Parse(format!("bad dimension {n}")))?;
    let rows = lines
        .map(|l| {
            l.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("expected {n} rows of {n} entries")));
    }
    GramMatrix::new(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn a2() -> GramMatrix {
        GramMatrix::from_integer(vec![ints(&[2, 1]), ints(&[1, 2])]).unwrap()
    }

    #[test]
    fn cholesky_examples() {
        let l = cholesky(&a2()).unwrap();
        assert!(l[0][0].within(2f64.sqrt(), 1e-15));
        assert!(l[0][1].within(0.0, 1e-15));
        assert!(l[1][0].within(0.5f64.sqrt(), 1e-15));
        assert!(l[1][1].within(1.5f64.sqrt(), 1e-15));
        let l = cholesky(&GramMatrix::from_integer(vec![ints(&[4])]).unwrap()).unwrap();
        assert!(l[0][0].within(2.0, 1e-15));
        let id = GramMatrix::from_integer(vec![ints(&[1, 0]), ints(&[0, 1])]).unwrap();
        let l = cholesky(&id).unwrap();
        assert!(l[0][0].within(1.0, 1e-15) && l[1][0].within(0.0, 1e-15) && l[1][1].within(1.0, 1e-15));
    }

    #[test]
    fn rounding_is_exact_at_halves() {
        assert_eq!(round_scaled_root(&ratio(5, 2), &ratio(1, 1)), int(3));
        assert_eq!(round_scaled_root(&ratio(-5, 2), &ratio(1, 1)), int(-2));
        assert_eq!(round_scaled_root(&ratio(-13, 5), &ratio(1, 1)), int(-3));
        assert_eq!(round_scaled_root(&ratio(-12, 5), &ratio(1, 1)), int(-2));
        assert_eq!(round_scaled_root(&ratio(10, 1), &ratio(2, 1)), int(14));
        assert_eq!(round_scaled_root(&ratio(0, 1), &ratio(3, 1)), int(0));
        assert_eq!(round_scaled_root(&ratio(1, 4), &ratio(1, 1)), int(0));
    }

    #[test]
    fn build_b_examples() {
        assert_eq!(build_b(&[ints(&[3])]), vec![ints(&[3, 1])]);
        assert_eq!(build_b(&[ints(&[3, 0]), ints(&[1, 2])]), vec![ints(&[3, 1, 0]), ints(&[1, 2, 1])]);
        assert_eq!(
            build_b(&[ints(&[14, 0]), ints(&[7, 12])]),
            vec![ints(&[14, 1, 0]), ints(&[7, 12, 1])]
        );
    }

    #[test]
    fn kernel_vector_examples() {
        assert_eq!(kernel_vector(&[ints(&[3, 1])]), ints(&[1, -3]));
        assert_eq!(kernel_vector(&[ints(&[3, 1, 0]), ints(&[1, 2, 1])]), ints(&[1, -3, 5]));
        assert_eq!(kernel_vector(&[ints(&[14, 1, 0]), ints(&[7, 12, 1])]), ints(&[1, -14, 161]));
    }

    #[test]
    fn a2_at_kappa_10() {
        let r = approximate(&a2(), &int(10)).unwrap();
        assert_eq!(r.l_rounded, vec![ints(&[14, 0]), ints(&[7, 12])]);
        assert_eq!(r.s, ints(&[1, 14, 161]));
        assert_eq!(r.error, ratio(1, 10));
        assert!(r.bv_is_zero() && r.rounding_invariant_holds() && r.is_saturated());
        // the superdiagonal ones contribute 12/100^2 to the off-diagonal entry
        let r = approximate(&a2(), &int(100)).unwrap();
        assert_eq!(r.l_rounded, vec![ints(&[141, 0]), ints(&[71, 122])]);
        assert_eq!(r.error, ratio(133, 10_000));
    }

    #[test]
    fn identity_is_exact() {
        let one = GramMatrix::from_integer(vec![ints(&[1])]).unwrap();
        let r = approximate(&one, &int(37)).unwrap();
        assert_eq!(r.s, ints(&[1, 37]));
        assert_eq!(r.error, ratio(1, 37 * 37));
        assert!(approximate(&one, &int(0)).is_err());
    }

    #[test]
    fn sweeps() {
        let rows = convergence_sweep(&a2(), &ints(&[10, 20, 40, 80]), &SvpOptions::default()).unwrap();
        let errs: Vec<_> = rows.iter().map(|r| r.result.error.clone()).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        // error * kappa stays bounded
        assert!(rows.iter().all(|r| &r.result.error * Rational::from_integer(r.result.kappa.clone()) <= ratio(2, 1)));
        let d = rows[3].density.as_ref().unwrap();
        let hex = 1.0 / (2.0 * 3f64.sqrt());
        assert!((d.delta.to_f64() / hex - 1.0).abs() < 0.05);
        assert!(rows.iter().all(|r| r.saturated));

        let id = GramMatrix::from_integer(vec![ints(&[1, 0]), ints(&[0, 1])]).unwrap();
        let rows = convergence_sweep(&id, &ints(&[3, 7, 50]), &SvpOptions::default()).unwrap();
        for r in &rows {
            let k = &r.result.kappa;
            // off-diagonal of B B^t is 1 * kappa
            assert_eq!(r.result.error, Rational::new(1.into(), k.clone()));
        }
        assert!(convergence_sweep(&id, &ints(&[5, 5]), &SvpOptions::default()).is_err());
    }

    #[test]
    fn budget_errors_stay_in_the_row() {
        let rows = convergence_sweep(&a2(), &ints(&[10]), &SvpOptions::with_budget(1)).unwrap();
        let status = rows[0].density.as_ref().unwrap_err();
        assert!(status.starts_with("BUDGET"), "{status}");
        assert!(rows[0].csv_row().ends_with(status.as_str()));
    }

    #[test]
    fn gram_files() {
        let g = parse_gram("2\n2 1\n1 2\n").unwrap();
        assert_eq!(g, a2());
        let g = parse_gram("# half-integral\n2\n1 1/2\n1/2 1\n").unwrap();
        assert_eq!(g.get(0, 1), &ratio(1, 2));
        assert!(parse_gram("2\n1 2\n2 1\n").is_err());
        assert!(parse_gram("2\n1 0\n").is_err());
        assert!(parse_gram("").is_err());
        assert!(parse_gram("1\nx\n").is_err());
    }

    #[test]
    fn random_pipelines() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=4);
            let m: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-5..=5)).collect()).collect();
            let den = rng.gen_range(1..=4);
            let g: Vec<Vec<Rational>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let dot: i64 = (0..n).map(|k| m[k][i] * m[k][j]).sum();
                            ratio(dot + if i == j { 1 } else { 0 }, den)
                        })
                        .collect()
                })
                .collect();
            let g = GramMatrix::new(g).unwrap();
            let kappa = int(rng.gen_range(1..=10_000));
            let r = approximate(&g, &kappa).unwrap();
            assert!(r.bv_is_zero());
            assert_eq!(r.v[0], int(1));
            assert!(r.rounding_invariant_holds(), "{g:?} kappa={kappa}");
        }
    }
}
