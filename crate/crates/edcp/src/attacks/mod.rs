//! Attacks that use many samples: phase states, the sieve, PGM recovery,
//! and the Fourier attack for r = q.

mod pgm;

pub use pgm::{
    pgm_distribution, pgm_povm_dense, pgm_recover, pgm_success_probability, PGM_MAX_STATES,
};

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coset::Challenger;
use crate::error::{Error, Result};
use crate::modmath::{solve_linear_mod, LinearSolution, RootOfUnity, ZqVector};
use crate::reductions::reduced_sample;
use crate::rng::{sample_index, trial_rng};
use crate::statevec::{Direction, IndexSpace, StateVector};

/// (|0⟩ + ω_q^{⟨y,s⟩}|1⟩)/√2 with public label y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseState {
    label: ZqVector,
    /// ⟨y, s⟩ mod q; hidden from callers.
    value: u64,
    issuer: u64,
}

impl PhaseState {
    pub fn q(&self) -> u64 {
        self.label.modulus()
    }

    pub fn label(&self) -> &ZqVector {
        &self.label
    }

    pub fn issuer(&self) -> u64 {
        self.issuer
    }

    #[cfg(test)]
    pub(crate) fn value(&self) -> u64 {
        self.value
    }

    pub fn to_dense(&self) -> Result<StateVector<f64>> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ph = RootOfUnity::new(self.q(), self.value as i64).evaluate::<f64>();
        StateVector::new(
            IndexSpace::new(vec![2])?,
            vec![Complex::new(h, 0.0), ph * h],
        )
    }
}

/// Width-2 sample, QFT_{q^n} on the second register, measure: a phase state labelled by the outcome.
pub fn edcp_to_phase<R: Rng + ?Sized>(ch: &mut Challenger, rng: &mut R) -> Result<PhaseState> {
    let q = ch.params().q();
    let st = reduced_sample(ch, 2, rng)?;
    let issuer = st.issuer();
    let (u, st) = st.fourier_measure_second(rng)?;
    let amps = st.first_register()?;
    let [(0, a0), (1, a1)] = amps.as_slice() else {
        return Err(Error::InvalidOperation(
            "expected a two-term first register".into(),
        ));
    };
    let rel = a1.mul(a0.conj());
    if q % rel.modulus() != 0 {
        return Err(Error::IncompatiblePhaseModulus {
            modulus: rel.modulus(),
            cap: q,
        });
    }
    let value = rel.exponent() * (q / rel.modulus()) % q;
    Ok(PhaseState {
        label: u,
        value,
        issuer,
    })
}

/// CNOT from `a` onto `b`, then measure `b`. Outcome 1 leaves the label
/// a.y − b.y (success); outcome 0 leaves a.y + b.y. Each has probability 1/2.
pub fn sieve_combine<R: Rng + ?Sized>(
    a: PhaseState,
    b: PhaseState,
    rng: &mut R,
) -> Result<(bool, PhaseState)> {
    if a.q() != b.q() || a.label.dim() != b.label.dim() || a.issuer != b.issuer {
        return Err(Error::ParamMismatch(
            "phase states from different sources".into(),
        ));
    }
    let q = a.q();
    let success = sample_index(&[0.5, 0.5], rng) == 1;
    let out = if success {
        PhaseState {
            label: a.label.sub(&b.label),
            value: (a.value + q - b.value) % q,
            issuer: a.issuer,
        }
    } else {
        PhaseState {
            label: a.label.add(&b.label),
            value: (a.value + b.value) % q,
            issuer: a.issuer,
        }
    };
    Ok((success, out))
}

/// The same combination on the dense two-qubit state; returns (outcome of b, remaining qubit).
pub fn sieve_combine_dense<R: Rng + ?Sized>(
    a: &StateVector<f64>,
    b: &StateVector<f64>,
    rng: &mut R,
) -> Result<(bool, StateVector<f64>)> {
    let joint = a.tensor(b)?;
    let cnot = joint.permute(|idx| if idx >= 2 { idx ^ 1 } else { idx })?;
    let (m, post) = cnot.measure_register(1, rng)?;
    Ok((m == 1, post.discard_register(1)?))
}

/// ℓ = k + 3n/(k·log₂ q).
pub fn kuperberg_pool_exponent(n: usize, q: u64, k: usize) -> f64 {
    k as f64 + 3.0 * n as f64 / (k as f64 * (q as f64).log2())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveReport {
    pub recovered: u64,
    pub pool: usize,
    /// Survivors after each stage.
    pub survivors: Vec<usize>,
    /// Phase states handed to the PGM.
    pub pgm_states: usize,
    pub samples: u64,
    /// Checked against the challenger after the fact.
    pub correct: bool,
}

/// One sieve stage: bucket by the given coordinates, pair within buckets, keep successes.
fn sieve_stage(pool: Vec<PhaseState>, coords: &[usize], seed: u64) -> Result<Vec<PhaseState>> {
    let mut buckets: BTreeMap<Vec<u64>, Vec<PhaseState>> = BTreeMap::new();
    for ps in pool {
        let key = coords.iter().map(|&c| ps.label.get(c)).collect();
        buckets.entry(key).or_default().push(ps);
    }
    let buckets: Vec<_> = buckets.into_values().collect();
    let survivors: Result<Vec<Vec<PhaseState>>> = buckets
        .into_par_iter()
        .enumerate()
        .map(|(bi, bucket)| {
            let mut rng = trial_rng(seed, bi as u64);
            let mut out = Vec::new();
            let mut it = bucket.into_iter();
            while let (Some(a), Some(b)) = (it.next(), it.next()) {
                let (ok, c) = sieve_combine(a, b, &mut rng)?;
                if ok {
                    out.push(c);
                }
            }
            Ok(out)
        })
        .collect();
    Ok(survivors?.into_iter().flatten().collect())
}

/// Recover s_coord: zero every other coordinate k at a time, then run the PGM.
pub fn kuperberg_recover<R: Rng + ?Sized>(
    ch: &mut Challenger,
    coord: usize,
    k: usize,
    pool_exponent: f64,
    rng: &mut R,
) -> Result<SieveReport> {
    let (q, n) = (ch.params().q(), ch.params().n());
    if coord >= n || k == 0 {
        return Err(Error::InvalidOperation(format!(
            "coordinate {coord} / block {k} out of range"
        )));
    }
    let issued0 = ch.issued();
    let pool_size = (q as f64).powf(pool_exponent).ceil() as usize;
    let mut pool = (0..pool_size)
        .map(|_| edcp_to_phase(ch, rng))
        .collect::<Result<Vec<_>>>()?;
    let others: Vec<usize> = (0..n).filter(|&c| c != coord).collect();
    let mut survivors = Vec::new();
    for (stage, block) in others.chunks(k).enumerate() {
        pool = sieve_stage(pool, block, rng.gen())?;
        survivors.push(pool.len());
        if pool.len() < 2 {
            return Err(Error::PoolExhausted {
                stage,
                survivors: pool.len(),
            });
        }
    }
    let need = (q as f64).log2().ceil() as usize + 1;
    if pool.len() < need {
        return Err(Error::PoolExhausted {
            stage: survivors.len(),
            survivors: pool.len(),
        });
    }
    pool.truncate(PGM_MAX_STATES);
    let pgm_states = pool.len();
    let recovered = pgm_recover(&pool, coord, rng)?;
    let correct = ch.reveal_secret().get(coord) == recovered;
    Ok(SieveReport {
        recovered,
        pool: pool_size,
        survivors,
        pgm_states,
        samples: ch.issued() - issued0,
        correct,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierAttackReport {
    pub secret: ZqVector,
    pub samples: u64,
    pub rounds: usize,
}

const FOURIER_ROUNDS: usize = 8;

/// r = q: QFT_{q^n} on the second register and QFT_r^{-1} on the first read off ⟨u, s⟩.
pub fn fourier_attack_r_eq_q<R: Rng + ?Sized>(
    ch: &mut Challenger,
    rng: &mut R,
) -> Result<FourierAttackReport> {
    let params = ch.params().clone();
    if params.r() != params.q() {
        return Err(Error::BadParams(format!(
            "needs r = q, got r = {}, q = {}",
            params.r(),
            params.q()
        )));
    }
    let issued0 = ch.issued();
    let mut eqs = Vec::new();
    for round in 1..=FOURIER_ROUNDS {
        for _ in 0..4 * params.n() {
            let (u, st) = ch.sample(None)?.fourier_measure_second(rng)?;
            eqs.push((u, st.qft_first_measure(Direction::Inverse, rng)?));
        }
        match solve_linear_mod(&eqs, params.modulus())? {
            LinearSolution::Unique(secret) => {
                return Ok(FourierAttackReport {
                    secret,
                    samples: ch.issued() - issued0,
                    rounds: round,
                });
            }
            LinearSolution::Underdetermined => continue,
        }
    }
    Err(Error::Underdetermined)
}

#[cfg(test)]
mod tests;
