use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CosetState, EdcpParams};
use crate::error::{Error, Result};
use crate::modmath::ZqVector;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Holds the hidden secret s and issues fresh samples of μ_{s,r} (or the phased μ_{s,r,p,t}).
pub struct Challenger {
    id: u64,
    params: EdcpParams,
    secret: ZqVector,
    rng: ChaCha8Rng,
    issued: u64,
}

// the secret stays out of debug output
impl std::fmt::Debug for Challenger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Challenger")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("issued", &self.issued)
            .finish_non_exhaustive()
    }
}

impl Challenger {
    /// Uniform secret drawn from the seeded generator.
    pub fn new(params: EdcpParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let secret = ZqVector::random(params.q(), params.n(), &mut rng);
        Self::build(params, secret, rng)
    }

    /// Fixed secret, for experiments that need a particular s.
    pub fn with_secret(params: EdcpParams, secret: ZqVector, seed: u64) -> Result<Self> {
        if secret.dim() != params.n() || secret.modulus() != params.q() {
            return Err(Error::ParamMismatch(format!(
                "secret {secret} does not live in Z_q^n"
            )));
        }
        Ok(Self::build(params, secret, ChaCha8Rng::seed_from_u64(seed)))
    }

    fn build(params: EdcpParams, secret: ZqVector, rng: ChaCha8Rng) -> Self {
        Self {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            params,
            secret,
            rng,
            issued: 0,
        }
    }

    pub fn params(&self) -> &EdcpParams {
        &self.params
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// Number of samples handed out so far.
    pub fn issued(&self) -> u64 {
        self.issued
    }

    /// Fresh sample with uniform x; `phase_t` adds ω_p^{j·t}.
    pub fn sample(&mut self, phase_t: Option<u64>) -> Result<CosetState> {
        let x = ZqVector::random(self.params.q(), self.params.n(), &mut self.rng);
        self.sample_with_offset(x, phase_t)
    }

    /// Sample with a chosen offset x. Simulation-only.
    pub fn sample_with_offset(&mut self, x: ZqVector, phase_t: Option<u64>) -> Result<CosetState> {
        let t = phase_t.unwrap_or(0);
        if t >= self.params.p() {
            return Err(Error::BadParams(format!(
                "phase t = {t} not in [0, {})",
                self.params.p()
            )));
        }
        if x.dim() != self.params.n() || x.modulus() != self.params.q() {
            return Err(Error::ParamMismatch(format!(
                "offset {x} does not live in Z_q^n"
            )));
        }
        self.issued += 1;
        Ok(CosetState::fresh(
            self.params.clone(),
            x,
            self.secret.clone(),
            t,
            self.id,
        ))
    }

    /// Whether `candidate` is the hidden secret.
    pub fn is_secret(&self, candidate: &ZqVector) -> bool {
        *candidate == self.secret
    }

    /// The hidden secret. Simulation-only: for scoring experiments, never for adversaries.
    pub fn reveal_secret(&self) -> &ZqVector {
        &self.secret
    }
}
