//! Search-to-decision reductions and the coset-to-LWE extractor.

mod extract;
mod hybrid;
mod phase;

pub use extract::{
    centered_gaussian_weights, extract_shifted_lwe, extract_shifted_lwe_composite,
    extraction_success_probability, ExtractionOutcome, ShiftedLweSample,
};
pub use hybrid::{
    digit_transform, find_critical_t, hybrid_digit_test, hybrid_r_prime, level_sample,
    search_via_hybrid,
};
pub use phase::{phase_candidate, search_via_phase};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coset::{Challenger, CosetState};
use crate::error::{Error, Result};
use crate::modmath::ZqVector;
use crate::rng::seeded;
use crate::statevec::Direction;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LweSample {
    pub a: ZqVector,
    pub b: u64,
}

/// A supplier of independent states for one oracle query.
pub type Source<'a> = dyn FnMut() -> Result<CosetState> + 'a;

/// Decides whether a source emits plain coset samples (zero phase, full
/// unit-stride support) or something else. Implementations draw as many
/// states as they need.
pub trait DecisionOracle {
    fn decide(&mut self, source: &mut Source<'_>) -> Result<bool>;
    fn queries(&self) -> u64;
}

/// Reads the symbolic description directly. One state per query.
#[derive(Clone, Debug, Default)]
pub struct PerfectOracle {
    queries: u64,
}

impl PerfectOracle {
    pub fn new() -> Self {
        Self::default()
    }
}

impl DecisionOracle for PerfectOracle {
    fn decide(&mut self, source: &mut Source<'_>) -> Result<bool> {
        self.queries += 1;
        let st = source()?;
        Ok(st.support().stride == 1 && st.support().count >= 2 && st.phase_modulus() == 1)
    }

    fn queries(&self) -> u64 {
        self.queries
    }
}

/// A synthetic oracle that only notices hybrid levels ≥ `level`, i.e. strides ≥ p^level.
#[derive(Clone, Debug)]
pub struct BlindOracle {
    p: u64,
    level: u32,
    queries: u64,
}

impl BlindOracle {
    pub fn new(p: u64, level: u32) -> Self {
        Self {
            p,
            level,
            queries: 0,
        }
    }
}

impl DecisionOracle for BlindOracle {
    fn decide(&mut self, source: &mut Source<'_>) -> Result<bool> {
        self.queries += 1;
        let st = source()?;
        Ok(st.support().stride < self.p.pow(self.level) && st.phase_modulus() == 1)
    }

    fn queries(&self) -> u64 {
        self.queries
    }
}

/// Measures each state, then votes.
///
/// Single-state test: QFT the second register; if u = 0, inverse-QFT the
/// first register and accept on outcome 0. A plain sample accepts with
/// probability q^{-n} exactly; thinned or phased samples accept with at most
/// half of that for the parameters exercised here.
#[derive(Debug)]
pub struct StatisticalOracle {
    confidence: u32,
    rng: ChaCha8Rng,
    queries: u64,
    budget: u64,
}

impl StatisticalOracle {
    /// `confidence` is the n in the e^{−n/4} error bound.
    pub fn new(confidence: u32, seed: u64) -> Self {
        Self {
            confidence,
            rng: seeded(seed),
            queries: 0,
            budget: 1 << 24,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    fn single(&mut self, st: CosetState) -> Result<bool> {
        let (u, st) = st.fourier_measure_second(&mut self.rng)?;
        if !u.is_zero() {
            return Ok(false);
        }
        Ok(st.qft_first_measure(Direction::Inverse, &mut self.rng)? == 0)
    }
}

impl DecisionOracle for StatisticalOracle {
    fn decide(&mut self, source: &mut Source<'_>) -> Result<bool> {
        self.queries += 1;
        let first = source()?;
        let qn = (first.params().q() as f64).powi(first.params().n() as i32);
        let plain_rate = 1.0 / qn;
        // distinguishing advantage ≥ plain_rate/2
        let p_n = 2.0 / plain_rate;
        let (conf, budget) = (self.confidence, self.budget);
        let mut pending = Some(first);
        amplify(
            || {
                let st = match pending.take() {
                    Some(s) => s,
                    None => source()?,
                };
                self.single(st)
            },
            p_n,
            conf,
            0.75 * plain_rate,
            budget,
        )
    }

    fn queries(&self) -> u64 {
        self.queries
    }
}

/// m = ⌈2·n·p_n²⌉.
pub fn amplification_samples(p_n: f64, n: u32) -> u64 {
    (2.0 * n as f64 * p_n * p_n).ceil() as u64
}

/// Run a base distinguisher m = ⌈2n·p_n²⌉ times and report whether its
/// acceptance rate exceeds `threshold`.
pub fn amplify(
    mut base: impl FnMut() -> Result<bool>,
    p_n: f64,
    n: u32,
    threshold: f64,
    budget: u64,
) -> Result<bool> {
    let m = amplification_samples(p_n, n);
    if m > budget {
        return Err(Error::SampleBudgetExhausted(m));
    }
    let mut ones = 0u64;
    for _ in 0..m {
        ones += u64::from(base()?);
    }
    Ok(ones as f64 > threshold * m as f64)
}

/// Outcome of a search reduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub secret: ZqVector,
    /// Fresh samples drawn from the challenger.
    pub samples: u64,
    pub oracle_queries: u64,
    /// (prime, critical level) per prime; empty for the phase reduction.
    pub critical_levels: Vec<(u64, u32)>,
    pub verified: bool,
}

/// Fresh sample of width `target`, retrying the self-reduction until it succeeds.
pub fn reduced_sample<R: Rng + ?Sized>(
    ch: &mut Challenger,
    target: u64,
    rng: &mut R,
) -> Result<CosetState> {
    loop {
        let st = ch.sample(None)?;
        if target == st.width() {
            return Ok(st);
        }
        let (ok, st) = st.reduce_r(target, rng)?;
        if ok {
            return Ok(st);
        }
    }
}

/// Check a candidate on fresh samples: after S_cand the first register of a
/// correct candidate is unentangled and decodes to 0 under QFT_r^{-1}.
pub fn verify_secret<R: Rng + ?Sized>(
    ch: &mut Challenger,
    candidate: &ZqVector,
    rounds: usize,
    rng: &mut R,
) -> Result<bool> {
    for _ in 0..rounds {
        let st = ch.sample(None)?.multiply_subtract(candidate)?;
        let (_, st) = st.measure_second(rng)?;
        if st.qft_first_measure(Direction::Inverse, rng)? != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}
