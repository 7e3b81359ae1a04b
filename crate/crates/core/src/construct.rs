//! Extension of mu-sequences one term at a time.
//!
//! Given a mu-sequence `(s_0, ..., s_{n-1})`, a new term `t` keeps the
//! property exactly when no `z in Z^n`, `k >= 1` with `|z|^2 + k^2 < mu`
//! satisfies `k t = |<z, s>|`. The set of such `t` is the forbidden set.

use std::collections::BTreeSet;
use std::ops::{Div, Neg, Rem};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{Integer, Rational};
use crate::density::{growth_bounds, theta_series, unit_ball_volume};
use crate::enumerate::{fold_with_dot, DotAccumulator, Mode};
use crate::error::{Error, Result};
use crate::real::{format_real, HighReal};
use crate::sequence::{ser_integer, MuSequence};

fn isqrt_u64(x: u64) -> u64 {
    crate::arith::isqrt(&Integer::from(x)).to_u64().expect("fits")
}

/// Values excluded as the next term of a prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenSet {
    pub mu: Integer,
    pub prefix_len: usize,
    /// `by_k[k - 1]`: the `a` with `(a, k)` a forbidden pair.
    pub by_k: Vec<BTreeSet<Integer>>,
    pub values: BTreeSet<Integer>,
    /// Number of forbidden pairs `(a, k)`.
    pub candidate_count: u64,
    /// Half-mode vectors with `0 < |z|^2 <= mu - 2`.
    pub short_vectors: u64,
}

impl ForbiddenSet {
    fn from_parts(mu: &Integer, prefix_len: usize, by_k: Vec<BTreeSet<Integer>>, short_vectors: u64) -> Self {
        let values = by_k.iter().flatten().cloned().collect();
        let candidate_count = by_k.iter().map(|s| s.len() as u64).sum();
        ForbiddenSet {
            mu: mu.clone(),
            prefix_len,
            by_k,
            values,
            candidate_count,
            short_vectors,
        }
    }

    pub fn contains(&self, t: &Integer) -> bool {
        self.values.contains(t)
    }

    /// Smallest admissible integer in `[lower, upper]`.
    pub fn first_admissible(&self, lower: &Integer, upper: Option<&Integer>) -> Option<Integer> {
        let mut t = lower.clone();
        for v in self.values.range(lower.clone()..) {
            if *v != t {
                break;
            }
            t += 1;
        }
        match upper {
            Some(u) if t > *u => None,
            _ => Some(t),
        }
    }

    /// `f <= sqrt(mu - 2) * #short vectors`, checked exactly.
    pub fn cardinality_bound_holds(&self) -> bool {
        let f = Integer::from(self.candidate_count);
        let n = Integer::from(self.short_vectors);
        let slack = (&self.mu - 2) * &n * &n;
        &f * &f <= slack
    }
}

fn zero_dot_error(z: &[i64], norm: u64) -> Error {
    Error::NotMuSequence {
        witness: z.iter().map(ToString::to_string).collect(),
        norm: norm.to_string(),
    }
}

type Acc<T> = (Vec<BTreeSet<T>>, u64);

fn collect_pairs<T>(weights: &[T], mu: u64, budget: u64) -> Result<Acc<T>>
where
    T: DotAccumulator + Ord + Neg<Output = T> + Rem<Output = T> + Div<Output = T> + From<i64>,
{
    let kmax = isqrt_u64(mu - 2) as usize;
    fold_with_dot(
        weights,
        &Integer::from(mu - 2),
        Mode::Half,
        budget,
        || (vec![BTreeSet::new(); kmax], 0u64),
        |acc: &mut Acc<T>, z, norm, dot| {
            let zero = T::origin();
            if *dot == zero {
                return Err(zero_dot_error(z, norm));
            }
            acc.1 += 1;
            let d = if *dot < zero { -dot.clone() } else { dot.clone() };
            let top = isqrt_u64(mu - 1 - norm);
            for k in 1..=top {
                let kk = T::from(k as i64);
                if d.clone() % kk.clone() == zero {
                    acc.0[k as usize - 1].insert(d.clone() / kk);
                }
            }
            Ok(())
        },
        |mut a, b| {
            for (x, y) in a.0.iter_mut().zip(b.0) {
                x.extend(y);
            }
            a.1 += b.1;
            a
        },
    )
}

fn mu_small(mu: &Integer) -> Result<u64> {
    mu.to_u64()
        .filter(|&m| m < 1 << 40)
        .ok_or_else(|| Error::InvalidInput(format!("mu = {mu} is too large to enumerate")))
}

/// The forbidden values for the term after `prefix`.
///
/// Short vectors are enumerated once in half mode with their dot product
/// against the prefix carried down the tree. A zero dot product exposes a
/// kernel vector of norm below mu, which is reported as
/// [`Error::NotMuSequence`].
pub fn forbidden_values(prefix: &MuSequence, budget: u64) -> Result<ForbiddenSet> {
    let mu = mu_small(prefix.mu())?;
    let n = prefix.len();
    if mu == 2 {
        return Ok(ForbiddenSet::from_parts(prefix.mu(), n, Vec::new(), 0));
    }
    let r = isqrt_u64(mu - 2) as i128;
    let l1: Integer = prefix.terms().iter().map(|t| t.abs()).sum();
    let (by_k, count) = if (l1 * r).bits() < 120 {
        let w: Vec<i128> = prefix.terms().iter().map(|t| t.to_i128().expect("bounded")).collect();
        let (sets, count) = collect_pairs(&w, mu, budget)?;
        let sets = sets
            .into_iter()
            .map(|s| s.into_iter().map(Integer::from).collect())
            .collect();
        (sets, count)
    } else {
        collect_pairs(prefix.terms(), mu, budget)?
    };
    Ok(ForbiddenSet::from_parts(prefix.mu(), n, by_k, count))
}

/// Same set as [`forbidden_values`], by scanning the full box
/// `[-r, r]^n`, `r = floor(sqrt(mu - 2))`, and recomputing every dot product.
pub fn forbidden_values_naive(prefix: &MuSequence, budget: u64) -> Result<ForbiddenSet> {
    let mu = mu_small(prefix.mu())?;
    let n = prefix.len();
    if mu == 2 {
        return Ok(ForbiddenSet::from_parts(prefix.mu(), n, Vec::new(), 0));
    }
    let r = isqrt_u64(mu - 2) as i64;
    let side = (2 * r + 1) as u64;
    let cells = side.checked_pow(n as u32).filter(|&c| c <= budget);
    let Some(cells) = cells else {
        return Err(Error::budget("box-scan cells", format!("{side}^{n}"), budget));
    };
    let kmax = r as usize;
    let mut by_k = vec![BTreeSet::new(); kmax];
    let mut count = 0u64;
    let mut z = vec![0i64; n];
    for idx in 0..cells {
        let mut c = idx;
        for slot in z.iter_mut().rev() {
            *slot = (c % side) as i64 - r;
            c /= side;
        }
        let norm: u64 = z.iter().map(|x| (x * x) as u64).sum();
        if norm == 0 || norm > mu - 2 {
            continue;
        }
        let dot: Integer = z.iter().zip(prefix.terms()).map(|(a, b)| b * *a).sum();
        if dot.is_zero() {
            return Err(zero_dot_error(&z, norm));
        }
        if z.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0) {
            count += 1;
        }
        let d = dot.abs();
        for k in 1..=isqrt_u64(mu - 1 - norm) {
            let k = Integer::from(k);
            if (&d % &k).is_zero() {
                by_k[k.to_usize().unwrap() - 1].insert(&d / &k);
            }
        }
    }
    Ok(ForbiddenSet::from_parts(prefix.mu(), n, by_k, count))
}

/// Outcome of one extension step.
#[derive(Clone, Debug, Serialize)]
pub struct ExtensionReport {
    /// Index of the new term.
    pub n: usize,
    #[serde(serialize_with = "ser_integer")]
    pub term: Integer,
    pub f: u64,
    #[serde(serialize_with = "ser_real")]
    pub bound_first: HighReal,
    #[serde(serialize_with = "ser_real")]
    pub bound_second: HighReal,
    /// Statistic of the extended sequence.
    #[serde(serialize_with = "ser_real")]
    pub sigma_tilde: HighReal,
}

fn ser_real<S: serde::Serializer>(v: &HighReal, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(v.to_f64())
}

impl ExtensionReport {
    fn new(extended: &MuSequence, fs: &ForbiddenSet, term: Integer, mu: u64) -> Self {
        let n = fs.prefix_len;
        let (bound_first, bound_second) = growth_bounds(mu, n as u32);
        ExtensionReport {
            n,
            term,
            f: fs.candidate_count,
            bound_first,
            bound_second,
            sigma_tilde: sigma_statistic(extended),
        }
    }

    /// `s_n <= f + 1 <= first <= second`, with certified comparisons.
    pub fn bound_chain_holds(&self) -> bool {
        let f1 = Integer::from(self.f) + 1;
        self.term <= f1
            && HighReal::from_integer(&f1).certainly_le(&self.bound_first)
            && self.bound_first.certainly_le(&self.bound_second)
    }

    pub const CSV_HEADER: &'static str = "n,s_n,f,bound_first,bound_second,sigma_tilde";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.n,
            self.term,
            self.f,
            format_real(self.bound_first.to_f64()),
            format_real(self.bound_second.to_f64()),
            format_real(self.sigma_tilde.to_f64()),
        )
    }
}

/// Appends the smallest positive integer outside the forbidden set.
pub fn greedy_extend(prefix: &MuSequence, budget: u64) -> Result<(MuSequence, ExtensionReport)> {
    extend_in_interval(prefix, &Integer::one(), None, budget)
        .map(|r| r.expect("unbounded interval always has an admissible value"))
}

/// Appends the smallest admissible integer in `[lower, upper]`; `None` for
/// `upper` means no upper end. `Ok(None)` when every candidate is forbidden.
pub fn extend_in_interval(
    prefix: &MuSequence,
    lower: &Integer,
    upper: Option<&Integer>,
    budget: u64,
) -> Result<Option<(MuSequence, ExtensionReport)>> {
    if *lower < Integer::one() || upper.is_some_and(|u| u < lower) {
        return Err(Error::InvalidInput(format!(
            "interval [{lower}, {}] is empty or not positive",
            upper.map_or("inf".to_string(), ToString::to_string)
        )));
    }
    let mu = mu_small(prefix.mu())?;
    let fs = forbidden_values(prefix, budget)?;
    let Some(term) = fs.first_admissible(lower, upper) else {
        return Ok(None);
    };
    let extended = prefix.extended(term.clone())?;
    let report = ExtensionReport::new(&extended, &fs, term, mu);
    Ok(Some((extended, report)))
}

/// `sqrt(sum s_i^2) / (mu^{(L-1)/2} V_{L-1})` for a sequence of length `L`.
pub fn sigma_statistic(seq: &MuSequence) -> HighReal {
    let n = seq.len() - 1;
    let sum: Integer = seq.terms().iter().map(|t| t * t).sum();
    let scale = num_traits::pow(seq.mu().clone(), n);
    HighReal::from_rational(&Rational::new(sum, scale))
        .sqrt()
        .div(&unit_ball_volume(n as u32))
}

/// Target window for the next term under the interval strategy.
#[derive(Clone, Debug)]
pub struct IntervalSchedule {
    pub sigma: HighReal,
    pub eps: Rational,
}

impl Default for IntervalSchedule {
    fn default() -> Self {
        IntervalSchedule {
            sigma: theta_series(),
            eps: Rational::new(1.into(), 10.into()),
        }
    }
}

impl IntervalSchedule {
    /// `lower = max(1, ceil(sigma mu^{n/2} V_n))`, `upper = ceil((1 + eps) lower)`.
    pub fn window(&self, mu: u64, n: u32) -> (Integer, Integer) {
        let scale = HighReal::from_integer(&num_traits::pow(Integer::from(mu), n as usize)).sqrt();
        let target = self.sigma.mul(&scale).mul(&unit_ball_volume(n));
        let lower = target.ceil_upper().max(Integer::one());
        let factor = HighReal::from_rational(&(Rational::one() + &self.eps));
        let upper = factor.mul(&HighReal::from_integer(&lower)).ceil_upper();
        (lower, upper)
    }
}

#[derive(Clone, Debug)]
pub enum Strategy {
    Greedy,
    Interval(IntervalSchedule),
}

#[derive(Clone, Debug)]
pub struct Build {
    pub sequence: MuSequence,
    pub reports: Vec<ExtensionReport>,
}

/// Extends `(1)` to length `n_max + 1`.
pub fn build_sequence(mu: &Integer, n_max: usize, strategy: &Strategy, budget: u64) -> Result<Build> {
    if n_max == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let m = mu_small(mu)?;
    let mut seq = MuSequence::new(mu.clone(), vec![Integer::one()])?;
    let mut reports = Vec::with_capacity(n_max);
    for step in 1..=n_max {
        let (next, report) = match strategy {
            Strategy::Greedy => greedy_extend(&seq, budget)?,
            Strategy::Interval(s) => {
                let (lo, hi) = s.window(m, step as u32);
                extend_in_interval(&seq, &lo, Some(&hi), budget)?.ok_or_else(|| {
                    Error::IntervalExhausted {
                        step,
                        lower: lo.to_string(),
                        upper: hi.to_string(),
                    }
                })?
            }
        };
        seq = next;
        reports.push(report);
    }
    Ok(Build {
        sequence: seq,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use crate::enumerate::DEFAULT_ENUM_BUDGET;
    use crate::reduce::{minimum_brute, SvpOptions};
    use crate::sequence::validate_mu_sequence;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    const B: u64 = DEFAULT_ENUM_BUDGET;

    fn seq(mu: i64, t: &[i64]) -> MuSequence {
        MuSequence::from_i64(mu, t).unwrap()
    }

    fn values(fs: &ForbiddenSet) -> Vec<i64> {
        fs.values.iter().map(|v| v.to_i64().unwrap()).collect()
    }

    fn greedy(mu: i64, n: usize) -> Vec<i64> {
        build_sequence(&int(mu), n, &Strategy::Greedy, B)
            .unwrap()
            .sequence
            .terms()
            .iter()
            .map(|t| t.to_i64().unwrap())
            .collect()
    }

    #[test]
    fn forbidden_examples() {
        assert!(forbidden_values(&seq(2, &[1]), B).unwrap().values.is_empty());
        assert_eq!(values(&forbidden_values(&seq(4, &[1, 2]), B).unwrap()), vec![1, 2, 3]);
        assert_eq!(values(&forbidden_values(&seq(3, &[1, 2]), B).unwrap()), vec![1, 2]);
        assert_eq!(values(&forbidden_values(&seq(4, &[1, 2, 4]), B).unwrap()), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn k_two_pairs_appear() {
        // mu = 6: |z|^2 = 1 allows k = 2, so a = s_i / 2 for even s_i
        let fs = forbidden_values(&seq(6, &[1, 4]), B).unwrap();
        assert!(fs.by_k[1].contains(&int(2)));
        assert!(fs.contains(&int(2)));
        assert!(fs.cardinality_bound_holds());
    }

    #[test]
    fn invalid_prefix_is_detected() {
        let err = forbidden_values(&seq(4, &[1, 1]), B).unwrap_err();
        assert!(matches!(err, Error::NotMuSequence { .. }));
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(greedy_extend(&seq(2, &[1, 1, 1]), B).unwrap().1.term, int(1));
        assert_eq!(greedy_extend(&seq(3, &[1, 2]), B).unwrap().1.term, int(3));
        assert_eq!(greedy_extend(&seq(4, &[1, 2, 4]), B).unwrap().1.term, int(7));
    }

    #[test]
    fn interval_examples() {
        let r = extend_in_interval(&seq(3, &[1, 2]), &int(5), Some(&int(10)), B).unwrap();
        assert_eq!(r.unwrap().1.term, int(5));
        let r = extend_in_interval(&seq(4, &[1, 2]), &int(1), Some(&int(3)), B).unwrap();
        assert!(r.is_none());
        let r = extend_in_interval(&seq(2, &[1]), &int(7), Some(&int(7)), B).unwrap();
        assert_eq!(r.unwrap().1.term, int(7));
        assert!(extend_in_interval(&seq(2, &[1]), &int(0), None, B).is_err());
        assert!(extend_in_interval(&seq(2, &[1]), &int(5), Some(&int(4)), B).is_err());
    }

    #[test]
    fn sigma_examples() {
        assert!(sigma_statistic(&seq(7, &[1])).within(1.0, 1e-15));
        assert!(sigma_statistic(&seq(4, &[1, 2])).within(5f64.sqrt() / 4.0, 1e-15));
        let want = 14f64.sqrt() / (3.0 * std::f64::consts::PI);
        assert!(sigma_statistic(&seq(3, &[1, 2, 3])).within(want, 1e-15));
    }

    #[test]
    fn build_examples() {
        assert_eq!(greedy(2, 5), vec![1; 6]);
        assert_eq!(greedy(3, 4), vec![1, 2, 3, 4, 5]);
        assert_eq!(greedy(4, 3), vec![1, 2, 4, 7]);
        assert!(build_sequence(&int(3), 0, &Strategy::Greedy, B).is_err());
    }

    #[test]
    fn reports_and_csv() {
        let b = build_sequence(&int(4), 3, &Strategy::Greedy, B).unwrap();
        assert_eq!(b.reports.len(), 3);
        assert!(b.reports.iter().all(ExtensionReport::bound_chain_holds));
        let row = b.reports[2].csv_row();
        assert!(row.starts_with("3,7,"), "{row}");
        assert_eq!(row.split(',').count(), ExtensionReport::CSV_HEADER.split(',').count());
    }

    #[test]
    fn greedy_is_certified_and_minimal() {
        for mu in 2..=6 {
            let b = build_sequence(&int(mu), 5, &Strategy::Greedy, B).unwrap();
            assert!(validate_mu_sequence(&b.sequence, &SvpOptions::default()).unwrap().passed());
            for r in &b.reports {
                let prefix = b.sequence.prefix(r.n);
                let mut t = int(1);
                while t < r.term {
                    let w = prefix.extended(t.clone()).unwrap();
                    let m = minimum_brute(w.terms(), &int(mu), 1 << 24).unwrap();
                    assert!(m.is_some(), "mu={mu} n={} t={t} admissible", r.n);
                    t += 1;
                }
            }
        }
    }

    #[test]
    fn naive_agrees() {
        for mu in 2..=9 {
            let b = build_sequence(&int(mu), 5, &Strategy::Greedy, B).unwrap();
            for len in 1..=b.sequence.len() {
                let p = b.sequence.prefix(len);
                assert_eq!(forbidden_values(&p, B).unwrap(), forbidden_values_naive(&p, B).unwrap());
            }
        }
    }

    #[test]
    fn unbounded_interval_matches_greedy() {
        let p = seq(5, &[1, 2, 4]);
        let g = greedy_extend(&p, B).unwrap().1.term;
        let i = extend_in_interval(&p, &int(1), Some(&int(1_000_000_000)), B).unwrap().unwrap().1.term;
        assert_eq!(g, i);
    }

    #[test]
    fn interval_strategy() {
        let b = build_sequence(&int(2), 6, &Strategy::Interval(IntervalSchedule::default()), B).unwrap();
        assert!(validate_mu_sequence(&b.sequence, &SvpOptions::default()).unwrap().passed());
        let wide = IntervalSchedule {
            sigma: HighReal::from_f64(0.5),
            eps: Rational::one(),
        };
        let b = build_sequence(&int(9), 4, &Strategy::Interval(wide.clone()), B).unwrap();
        assert!(validate_mu_sequence(&b.sequence, &SvpOptions::default()).unwrap().passed());
        for r in &b.reports {
            let (lo, hi) = wide.window(9, r.n as u32);
            assert!(lo <= r.term && r.term <= hi);
        }
        // forbidden {1, 2} covers the first default window [1, 2]
        let err = build_sequence(&int(9), 1, &Strategy::Interval(IntervalSchedule::default()), B).unwrap_err();
        assert!(matches!(err, Error::IntervalExhausted { step: 1, .. }));
    }

    #[test]
    fn window_shape() {
        let s = IntervalSchedule::default();
        let (lo, hi) = s.window(100, 4);
        // 0.04321... * 100^2 * pi^2 / 2 = 2132.6...
        assert_eq!(lo, int(2133));
        assert_eq!(hi, int(2347));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn prefix_and_subsequence_closure(mu in 2i64..=7, n in 2usize..=6, mask in any::<u8>()) {
            let b = build_sequence(&int(mu), n, &Strategy::Greedy, B).unwrap();
            let keep: Vec<usize> = (1..=n).filter(|i| mask >> (i - 1) & 1 == 1).collect();
            let sub = b.sequence.subsequence(&keep);
            prop_assert!(validate_mu_sequence(&sub, &SvpOptions::default()).unwrap().passed());
            let pre = b.sequence.prefix(1 + n / 2);
            prop_assert!(validate_mu_sequence(&pre, &SvpOptions::default()).unwrap().passed());
        }

        #[test]
        fn cardinality_bound(mu in 3i64..=12, n in 1usize..=5) {
            let b = build_sequence(&int(mu), n, &Strategy::Greedy, B).unwrap();
            let fs = forbidden_values(&b.sequence, B).unwrap();
            prop_assert!(fs.cardinality_bound_holds());
        }
    }
}
