//! Coset samples to (shifted) LWE samples by Gaussian reshaping of the first register.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coset::CosetState;
use crate::error::{Error, Result};
use crate::modmath::ZqVector;
use crate::statevec::{Direction, IndexSpace, StateVector};

/// (a, b) with b = ⟨a, s⟩ + e − t' mod q, where t' is the input phase read mod q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftedLweSample {
    pub a: ZqVector,
    pub b: u64,
    /// Whether the input carried a phase.
    pub shifted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionOutcome {
    pub success: bool,
    pub sample: Option<ShiftedLweSample>,
}

/// g_λ(x) = exp(−πx²/λ²).
fn g(x: f64, lambda: f64) -> f64 {
    (-std::f64::consts::PI * x * x / (lambda * lambda)).exp()
}

/// Target amplitudes ε_j = g_λ(j − ⌊(r−1)/2⌋)/√r for j in [0, r).
pub fn centered_gaussian_weights(r: u64, lambda: f64) -> Vec<f64> {
    let c0 = ((r - 1) / 2) as f64;
    let norm = (r as f64).sqrt();
    (0..r).map(|j| g(j as f64 - c0, lambda) / norm).collect()
}

/// ‖ε‖₂², the per-attempt success probability.
pub fn extraction_success_probability(r: u64, lambda: f64) -> f64 {
    centered_gaussian_weights(r, lambda)
        .iter()
        .map(|e| e * e)
        .sum()
}

/// Extract from a fresh sample over prime q.
pub fn extract_shifted_lwe<R: Rng + ?Sized>(
    st: CosetState,
    lambda: f64,
    rng: &mut R,
) -> Result<ExtractionOutcome> {
    if !st.params().modulus().is_prime() {
        return Err(Error::BadParams(format!(
            "q = {} is not prime; use the composite extractor",
            st.params().q()
        )));
    }
    extract(st, lambda, rng)
}

/// Composite q with an ω_p phase: the shift appears as t·(q/p) mod q.
pub fn extract_shifted_lwe_composite<R: Rng + ?Sized>(
    st: CosetState,
    lambda: f64,
    rng: &mut R,
) -> Result<ExtractionOutcome> {
    extract(st, lambda, rng)
}

fn extract<R: Rng + ?Sized>(st: CosetState, lambda: f64, rng: &mut R) -> Result<ExtractionOutcome> {
    if !(lambda > 0.0) {
        return Err(Error::BadParams(format!(
            "λ must be positive, got {lambda}"
        )));
    }
    let sup = st.support();
    let (w, q) = (st.width(), st.params().q());
    if sup.stride != 1 || sup.base != 0 || sup.count != w {
        return Err(Error::InvalidOperation(
            "extraction needs a full-width sample".into(),
        ));
    }
    let shifted = st.phase_modulus() != 1;
    let (u, st) = st.fourier_measure_second(rng)?;

    // centre j and embed it in Z_q
    let c0 = (w - 1) / 2;
    let slot = |j: u64| ((j + q - c0 % q) % q) as usize;
    let amp = 1.0 / (w as f64).sqrt();
    let mut amps = vec![Complex::new(0.0, 0.0); q as usize];
    for (j, ph) in st.first_register()? {
        amps[slot(j)] += ph.evaluate::<f64>() * amp;
    }
    let mut eps = vec![0.0; q as usize];
    for (j, e) in centered_gaussian_weights(w, lambda).into_iter().enumerate() {
        eps[slot(j as u64)] = e;
    }
    let reg = StateVector::new(IndexSpace::new(vec![q as usize])?, amps)?;
    let (ok, reg) = reg.rejection_resample(&eps, rng)?;
    if !ok {
        return Ok(ExtractionOutcome {
            success: false,
            sample: None,
        });
    }
    let (y, _) = reg.qft(0, Direction::Forward)?.measure_register(0, rng)?;
    Ok(ExtractionOutcome {
        success: true,
        sample: Some(ShiftedLweSample {
            a: u.neg(),
            b: y as u64,
            shifted,
        }),
    })
}
