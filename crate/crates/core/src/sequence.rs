use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize, Serializer};

use crate::arith::{parse_integer, Integer};
use crate::error::{Error, Result};
use crate::lattice::KernelLattice;
use crate::reduce::{SvpCertificate, SvpOptions};

pub(crate) fn ser_integer<S: Serializer>(v: &Integer, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub(crate) fn ser_integers<S: Serializer>(
    v: &[Integer],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// A candidate mu-sequence: `terms[0] = 1`, all terms positive, `mu >= 2`.
///
/// Construction only checks these structural conditions; the lattice
/// condition is established by [`validate_mu_sequence`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuSequence {
    mu: Integer,
    terms: Vec<Integer>,
}

impl MuSequence {
    pub fn new(mu: Integer, terms: Vec<Integer>) -> Result<Self> {
        if mu < Integer::from(2) {
            return Err(Error::InvalidInput(format!("mu = {mu} must be at least 2")));
        }
        match terms.first() {
            Some(t) if t.is_one() => {}
            Some(t) => return Err(Error::InvalidInput(format!("first term {t} must be 1"))),
            None => return Err(Error::InvalidInput("empty sequence".into())),
        }
        if let Some(t) = terms.iter().find(|t| !t.is_positive()) {
            return Err(Error::InvalidInput(format!("term {t} is not positive")));
        }
        Ok(MuSequence { mu, terms })
    }

    pub fn from_i64(mu: i64, terms: &[i64]) -> Result<Self> {
        Self::new(Integer::from(mu), terms.iter().map(|&t| Integer::from(t)).collect())
    }

    pub fn mu(&self) -> &Integer {
        &self.mu
    }

    /// `mu` as a machine integer, for the enumeration routines.
    pub fn mu_u64(&self) -> Result<u64> {
        self.mu
            .to_u64()
            .ok_or_else(|| Error::budget("mu", &self.mu, u64::MAX))
    }

    pub fn terms(&self) -> &[Integer] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The first `len` terms.
    pub fn prefix(&self, len: usize) -> MuSequence {
        assert!((1..=self.terms.len()).contains(&len), "prefix length out of range");
        MuSequence {
            mu: self.mu.clone(),
            terms: self.terms[..len].to_vec(),
        }
    }

    pub fn extended(&self, term: Integer) -> Result<MuSequence> {
        let mut terms = self.terms.clone();
        terms.push(term);
        MuSequence::new(self.mu.clone(), terms)
    }

    /// Keeps `terms[0]` and the terms whose index is in `keep` (sorted, >= 1).
    pub fn subsequence(&self, keep: &[usize]) -> MuSequence {
        let mut terms = vec![self.terms[0].clone()];
        terms.extend(keep.iter().filter(|&&i| i >= 1).map(|&i| self.terms[i].clone()));
        MuSequence {
            mu: self.mu.clone(),
            terms,
        }
    }

    /// Kernel lattice of the whole sequence (dimension `len - 1`).
    pub fn lattice(&self) -> KernelLattice {
        KernelLattice::new(self.terms.clone()).expect("terms checked on construction")
    }

    pub fn to_file(&self, certified: Option<bool>) -> SequenceFile {
        SequenceFile {
            mu: self.mu.to_string(),
            terms: self.terms.iter().map(ToString::to_string).collect(),
            certified,
        }
    }
}

/// On-disk form of a sequence. Integers are decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub mu: String,
    pub terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
}

impl SequenceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn to_sequence(&self) -> Result<MuSequence> {
        let mu = parse_integer(&self.mu)?;
        let terms = self
            .terms
            .iter()
            .map(|t| parse_integer(t))
            .collect::<Result<Vec<_>>>()?;
        MuSequence::new(mu, terms)
    }
}

/// Certified minimum of the kernel lattice of one prefix `(s_0, ..., s_n)`.
#[derive(Clone, Debug, Serialize)]
pub struct PrefixCertificate {
    pub n: usize,
    pub certificate: SvpCertificate,
}

#[derive(Clone, Debug)]
pub struct Validation {
    /// One entry per checked prefix, `n = 1, 2, ...`, up to and including the
    /// first failure.
    pub prefixes: Vec<PrefixCertificate>,
    /// `n` of the first prefix whose minimum is below mu.
    pub failure: Option<usize>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn failing_certificate(&self) -> Option<&PrefixCertificate> {
        self.failure.and_then(|_| self.prefixes.last())
    }
}

/// Certifies the mu-sequence condition prefix by prefix with the LLL +
/// enumeration oracle. Stops at the first prefix with minimum below mu.
///
/// A budget error means the oracle ran out of work, not that the sequence
/// is invalid.
pub fn validate_mu_sequence(seq: &MuSequence, opts: &SvpOptions) -> Result<Validation> {
    let mut prefixes = Vec::new();
    for n in 1..seq.len() {
        let certificate = seq.prefix(n + 1).lattice().shortest_vector(opts)?;
        let below = certificate.minimum < *seq.mu();
        prefixes.push(PrefixCertificate { n, certificate });
        if below {
            return Ok(Validation {
                prefixes,
                failure: Some(n),
            });
        }
    }
    Ok(Validation {
        prefixes,
        failure: None,
    })
}
