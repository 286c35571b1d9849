use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modmath::{prime_power, Modulus};

/// (n, q, r, p): dimension, modulus, superposition length and a distinguished prime of q.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct EdcpParams {
    n: usize,
    q: Modulus,
    r: u64,
    p: u64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    q: u64,
    r: u64,
    p: u64,
}

impl TryFrom<RawParams> for EdcpParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        EdcpParams::new(raw.n, raw.q, raw.r, raw.p)
    }
}

impl From<EdcpParams> for RawParams {
    fn from(p: EdcpParams) -> Self {
        RawParams {
            n: p.n,
            q: p.q.value(),
            r: p.r,
            p: p.p,
        }
    }
}

impl EdcpParams {
    pub fn new(n: usize, q: u64, r: u64, p: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadParams("n must be at least 1".into()));
        }
        let q = Modulus::new(q)?;
        if r < 2 || r > q.value() {
            return Err(Error::BadParams(format!(
                "r = {r} must lie in [2, q = {q}]"
            )));
        }
        if q.exponent_of(p) == 0 {
            return Err(Error::BadParams(format!(
                "p = {p} is not a prime divisor of q = {q}"
            )));
        }
        Ok(Self { n, q, r, p })
    }

    /// Like [`EdcpParams::new`] with p the smallest prime of q.
    pub fn with_smallest_prime(n: usize, q: u64, r: u64) -> Result<Self> {
        let p = Modulus::new(q)?.factors()[0].0;
        Self::new(n, q, r, p)
    }

    /// The cryptosystem needs q = p^s and r = p^{s'} with s' < s.
    pub fn check_qpke(&self) -> Result<()> {
        if self.q.factors().len() != 1 {
            return Err(Error::BadParams(format!(
                "q = {} is not a prime power",
                self.q
            )));
        }
        match prime_power(self.r) {
            Some((p, _)) if p == self.p && self.r < self.q.value() => Ok(()),
            _ => Err(Error::BadParams(format!(
                "r = {} must be a power of p = {} strictly below q = {}",
                self.r, self.p, self.q
            ))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q.value()
    }

    pub fn modulus(&self) -> &Modulus {
        &self.q
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Same (n, q, p) with a different superposition length.
    pub fn with_r(&self, r: u64) -> Result<Self> {
        Self::new(self.n, self.q.value(), r, self.p)
    }

    pub fn with_p(&self, p: u64) -> Result<Self> {
        Self::new(self.n, self.q.value(), self.r, p)
    }
}
