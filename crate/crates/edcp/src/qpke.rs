//! One-bit quantum public-key encryption over coset states.
//!
//! The public key is a fresh coset state with zero phase, the ciphertext
//! multiplies it by ω_p^{btj}, and decryption strips the second register and
//! reads the phase back with QFT_r.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coset::{Challenger, CosetState, EdcpParams, LinearForm};
use crate::error::{Error, Result};
use crate::modmath::ZqVector;
use crate::rng::trial_rng;
use crate::statevec::{Direction, IndexSpace, StateVector};

/// A single-use public-key state.
#[derive(Debug)]
pub struct PublicKey {
    params: EdcpParams,
    state: Option<CosetState>,
}

impl PublicKey {
    pub fn params(&self) -> &EdcpParams {
        &self.params
    }

    pub fn is_consumed(&self) -> bool {
        self.state.is_none()
    }

    pub fn state(&self) -> Option<&CosetState> {
        self.state.as_ref()
    }

    /// Wrap a state rebuilt from a full record.
    pub fn from_state(state: CosetState) -> Self {
        Self {
            params: state.params().clone(),
            state: Some(state),
        }
    }

    fn take(&mut self) -> Result<CosetState> {
        self.state.take().ok_or(Error::StateAlreadyConsumed)
    }
}

#[derive(Debug)]
pub struct Ciphertext {
    state: CosetState,
}

impl Ciphertext {
    pub fn params(&self) -> &EdcpParams {
        self.state.params()
    }

    pub fn state(&self) -> &CosetState {
        &self.state
    }

    pub fn into_state(self) -> CosetState {
        self.state
    }

    pub fn from_state(state: CosetState) -> Self {
        Self { state }
    }
}

/// Holder of the secret key. Every public key it issues is a fresh sample.
#[derive(Debug)]
pub struct KeyHolder {
    challenger: Challenger,
}

impl KeyHolder {
    pub fn new<R: Rng + ?Sized>(params: EdcpParams, rng: &mut R) -> Result<Self> {
        params.check_qpke()?;
        Ok(Self {
            challenger: Challenger::new(params, rng.gen()),
        })
    }

    pub fn with_secret(params: EdcpParams, secret: ZqVector, seed: u64) -> Result<Self> {
        params.check_qpke()?;
        Ok(Self {
            challenger: Challenger::with_secret(params, secret, seed)?,
        })
    }

    pub fn params(&self) -> &EdcpParams {
        self.challenger.params()
    }

    pub fn secret(&self) -> &ZqVector {
        self.challenger.reveal_secret()
    }

    pub fn public_key(&mut self) -> Result<PublicKey> {
        Ok(PublicKey::from_state(self.challenger.sample(None)?))
    }
}

#[derive(Debug)]
pub struct KeyPair {
    pub params: EdcpParams,
    pub secret: ZqVector,
    pub public: PublicKey,
}

pub fn keygen<R: Rng + ?Sized>(params: EdcpParams, rng: &mut R) -> Result<KeyPair> {
    let mut holder = KeyHolder::new(params.clone(), rng)?;
    let public = holder.public_key()?;
    Ok(KeyPair {
        params,
        secret: holder.secret().clone(),
        public,
    })
}

fn check_bit(b: u8) -> Result<()> {
    if b > 1 {
        return Err(Error::InvalidOperation(format!(
            "message bit must be 0 or 1, got {b}"
        )));
    }
    Ok(())
}

/// t uniform on Z_r \ {0}, resampled until p ∤ t.
pub fn sample_t<R: Rng + ?Sized>(params: &EdcpParams, rng: &mut R) -> u64 {
    loop {
        let t = rng.gen_range(1..params.r());
        if t % params.p() != 0 {
            return t;
        }
    }
}

pub fn encrypt<R: Rng + ?Sized>(pk: &mut PublicKey, b: u8, rng: &mut R) -> Result<Ciphertext> {
    check_bit(b)?;
    let t = sample_t(&pk.params, rng);
    encrypt_with_t(pk, b, t)
}

pub fn encrypt_with_t(pk: &mut PublicKey, b: u8, t: u64) -> Result<Ciphertext> {
    check_bit(b)?;
    let p = pk.params.p();
    let n = pk.params.n();
    let st = pk.take()?;
    let st = st.adversary_phase(&LinearForm::on_j(p, (b as u64 * t) % p, n))?;
    Ok(Ciphertext { state: st })
}

fn check_key(sk: &ZqVector, params: &EdcpParams) -> Result<()> {
    if sk.dim() != params.n() || sk.modulus() != params.q() {
        return Err(Error::ParamMismatch(format!(
            "secret key lives in Z_{}^{}, ciphertext in Z_{}^{}",
            sk.modulus(),
            sk.dim(),
            params.q(),
            params.n()
        )));
    }
    Ok(())
}

/// The raw QFT_r outcome of decryption; btr/p for honest inputs.
pub fn decrypt_outcome<R: Rng + ?Sized>(sk: &ZqVector, c: Ciphertext, rng: &mut R) -> Result<u64> {
    check_key(sk, c.params())?;
    let st = c.state.multiply_subtract(sk)?;
    // the second register is now |x⟩; measuring it is the same as discarding it
    let (_, st) = st.measure_second(rng)?;
    st.qft_first_measure(Direction::Inverse, rng)
}

pub fn decrypt<R: Rng + ?Sized>(sk: &ZqVector, c: Ciphertext, rng: &mut R) -> Result<u8> {
    Ok(u8::from(decrypt_outcome(sk, c, rng)? != 0))
}

pub fn roundtrip_trial<R: Rng + ?Sized>(params: &EdcpParams, b: u8, rng: &mut R) -> Result<bool> {
    let mut kp = keygen(params.clone(), rng)?;
    let c = encrypt(&mut kp.public, b, rng)?;
    Ok(decrypt(&kp.secret, c, rng)? == b)
}

/// Decrypt with a key other than the one behind the ciphertext.
pub fn wrong_key_trial<R: Rng + ?Sized>(params: &EdcpParams, b: u8, rng: &mut R) -> Result<bool> {
    let mut kp = keygen(params.clone(), rng)?;
    let wrong = loop {
        let s = ZqVector::random(params.q(), params.n(), rng);
        if s != kp.secret {
            break s;
        }
    };
    let c = encrypt(&mut kp.public, b, rng)?;
    Ok(decrypt(&wrong, c, rng)? == b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub seed: u64,
    pub ok: bool,
}

/// Independent trials in parallel, trial i seeded from (master, i).
pub fn roundtrip_batch(
    params: &EdcpParams,
    b: u8,
    trials: u64,
    master: u64,
) -> Result<Vec<TrialOutcome>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = crate::rng::derive_seed(master, i);
            let mut rng = trial_rng(master, i);
            Ok(TrialOutcome {
                trial: i,
                seed,
                ok: roundtrip_trial(params, b, &mut rng)?,
            })
        })
        .collect()
}

/// Gate-level circuits on dense vectors, kept as an oracle for the symbolic path.
pub mod circuits {
    use super::*;

    /// |0⟩|x⟩ → QFT_r ⊗ 1 → A_s.
    pub fn gen(params: &EdcpParams, s: &ZqVector, x: &ZqVector) -> Result<StateVector<f64>> {
        let space = IndexSpace::edcp(params.r(), params.q(), params.n())?;
        let idx = x.to_index();
        StateVector::basis(space, idx)
            .qft(0, Direction::Forward)?
            .multiply_add(s, 1)
    }

    /// Ancilla |1⟩ → QFT_p → T_bt: |j⟩|y⟩|z⟩ ↦ |j⟩|y⟩|z − jbt⟩ → measure and drop the ancilla.
    pub fn enc<R: Rng + ?Sized>(
        st: StateVector<f64>,
        p: u64,
        b: u8,
        t: u64,
        rng: &mut R,
    ) -> Result<StateVector<f64>> {
        let anc =
            StateVector::basis(IndexSpace::new(vec![p as usize])?, 1).qft(0, Direction::Forward)?;
        let joint = st.tensor(&anc)?;
        let space = joint.space().clone();
        let last = space.registers() - 1;
        let bt = (b as u64 * t) % p;
        let joint = joint.permute(|idx| {
            let mut d = space.decode(idx);
            let shift = (d[0] as u64 % p) * bt % p;
            d[last] = ((d[last] as u64 + p - shift) % p) as usize;
            space.encode(&d)
        })?;
        let (_, joint) = joint.measure_register(last, rng)?;
        joint.discard_register(last)
    }

    /// S_s, measure and drop the second register, QFT_r^{-1}, measure.
    pub fn dec<R: Rng + ?Sized>(st: StateVector<f64>, sk: &ZqVector, rng: &mut R) -> Result<u64> {
        let mut st = st.multiply_add(sk, -1)?;
        for _ in 0..sk.dim() {
            let (_, s) = st.measure_register(1, rng)?;
            st = s.discard_register(1)?;
        }
        let (k, _) = st.qft(0, Direction::Inverse)?.measure_register(0, rng)?;
        Ok(k as u64)
    }

    /// Register-0 distribution right before the final decryption measurement.
    pub fn dec_distribution(st: StateVector<f64>, sk: &ZqVector) -> Result<Vec<f64>> {
        let st = st.multiply_add(sk, -1)?;
        let space = st.space().clone();
        let qn = space.stride(0);
        let r = space.factors()[0];
        // the second register is classical after S_s; each branch is a pure state on register 0
        let mut probs = vec![0.0; r];
        for y in 0..qn {
            let amps: Vec<_> = (0..r).map(|j| st.amp(j * qn + y)).collect();
            let w: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if w == 0.0 {
                continue;
            }
            let reg = StateVector::normalized(IndexSpace::new(vec![r])?, amps)?
                .qft(0, Direction::Inverse)?;
            for (k, pr) in reg.probabilities().into_iter().enumerate() {
                probs[k] += w * pr;
            }
        }
        Ok(probs)
    }
}
