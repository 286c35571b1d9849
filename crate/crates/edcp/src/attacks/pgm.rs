//! Pretty-good measurement on a tensor of phase states with labels (0,…,0,y_j,0,…).
//!
//! Every candidate |ψ_v⟩ = 2^{-t/2} Σ_x ω_q^{v·α(x)} |x⟩ with α(x) = Σ_j x_j y_j
//! lives in the span of the fiber states |F_a⟩ (uniform over α^{-1}(a)). In
//! that basis the Gram operator is diagonal, which gives the POVM in closed form.

use num_complex::Complex;
use rand::Rng;

use super::PhaseState;
use crate::error::{Error, Result};
use crate::modmath::RootOfUnity;
use crate::rng::sample_index;
use crate::statevec::eigen::hermitian_function;
use crate::statevec::{IndexSpace, StateVector};

pub const PGM_MAX_STATES: usize = 14;
const EIGEN_FLOOR: f64 = 1e-10;

fn alpha(x: usize, labels: &[u64], q: u64) -> u64 {
    // qubit 0 is the most significant bit of x
    let t = labels.len();
    labels
        .iter()
        .enumerate()
        .filter(|(j, _)| (x >> (t - 1 - j)) & 1 == 1)
        .fold(0, |acc, (_, &y)| (acc + y) % q)
}

/// Fiber weights P(a) = |α^{-1}(a)|/2^t.
fn fiber_weights(labels: &[u64], q: u64) -> Vec<f64> {
    let dim = 1usize << labels.len();
    let mut w = vec![0.0; q as usize];
    for x in 0..dim {
        w[alpha(x, labels, q) as usize] += 1.0 / dim as f64;
    }
    w
}

/// Average success probability (1/q)(Σ_a √P(a))².
pub fn pgm_success_probability(labels: &[u64], q: u64) -> f64 {
    let s: f64 = fiber_weights(labels, q).iter().map(|p| p.sqrt()).sum();
    s * s / q as f64
}

/// Outcome distribution of the PGM on a given joint state.
pub fn pgm_distribution(joint: &StateVector<f64>, labels: &[u64], q: u64) -> Vec<f64> {
    let mut proj = vec![Complex::new(0.0, 0.0); q as usize];
    let mut sizes = vec![0usize; q as usize];
    for (x, amp) in joint.amps().iter().enumerate() {
        let a = alpha(x, labels, q) as usize;
        proj[a] += amp;
        sizes[a] += 1;
    }
    (0..q)
        .map(|v| {
            let s: Complex<f64> = (0..q as usize)
                .filter(|&a| sizes[a] > 0)
                .map(|a| {
                    proj[a] / (sizes[a] as f64).sqrt()
                        * RootOfUnity::new(q, -((v * a as u64) as i64)).evaluate::<f64>()
                })
                .sum();
            s.norm_sqr() / q as f64
        })
        .collect()
}

fn check_labels(states: &[PhaseState], coord: usize) -> Result<Vec<u64>> {
    let q = states[0].q();
    states
        .iter()
        .map(|s| {
            if s.q() != q {
                return Err(Error::ParamMismatch(
                    "phase states over different moduli".into(),
                ));
            }
            if s.label
                .coords()
                .iter()
                .enumerate()
                .any(|(i, &c)| i != coord && c != 0)
            {
                return Err(Error::InvalidOperation(format!(
                    "label {} is not supported on coordinate {coord}",
                    s.label
                )));
            }
            Ok(s.label.get(coord))
        })
        .collect()
}

/// Measure the joint state of `states` with the PGM and return the guess for s_coord.
pub fn pgm_recover<R: Rng + ?Sized>(
    states: &[PhaseState],
    coord: usize,
    rng: &mut R,
) -> Result<u64> {
    if states.is_empty() {
        return Err(Error::InvalidOperation("no phase states".into()));
    }
    if states.len() > PGM_MAX_STATES {
        return Err(Error::DimensionCap {
            dim: 1u128 << states.len(),
            cap: 1 << PGM_MAX_STATES,
        });
    }
    let q = states[0].q();
    let labels = check_labels(states, coord)?;
    let mut joint = states[0].to_dense()?;
    for s in &states[1..] {
        joint = joint.tensor(&s.to_dense()?)?;
    }
    let dist = pgm_distribution(&joint, &labels, q);
    Ok(sample_index(&dist, rng) as u64)
}

/// POVM elements built from the Gram matrix with an eigenvalue floor; the
/// complement of the candidates' span is folded into outcome 0.
pub fn pgm_povm_dense(labels: &[u64], q: u64) -> Result<Vec<Vec<Complex<f64>>>> {
    let space = IndexSpace::new(vec![2; labels.len()])?;
    let d = space.dim();
    let cands: Vec<Vec<Complex<f64>>> = (0..q)
        .map(|v| {
            let norm = 1.0 / (d as f64).sqrt();
            (0..d)
                .map(|x| {
                    RootOfUnity::new(q, (v * alpha(x, labels, q)) as i64).evaluate::<f64>() * norm
                })
                .collect()
        })
        .collect();
    let mut gram = vec![Complex::new(0.0, 0.0); d * d];
    for c in &cands {
        for i in 0..d {
            for j in 0..d {
                gram[i * d + j] += c[i] * c[j].conj() / q as f64;
            }
        }
    }
    let inv_sqrt = hermitian_function(
        &gram,
        d,
        |x| if x > EIGEN_FLOOR { 1.0 / x.sqrt() } else { 0.0 },
    );
    let mut elems: Vec<Vec<Complex<f64>>> = cands
        .iter()
        .map(|c| {
            let w: Vec<Complex<f64>> = (0..d)
                .map(|i| (0..d).map(|k| inv_sqrt[i * d + k] * c[k]).sum())
                .collect();
            let mut e = vec![Complex::new(0.0, 0.0); d * d];
            for i in 0..d {
                for j in 0..d {
                    e[i * d + j] = w[i] * w[j].conj() / q as f64;
                }
            }
            e
        })
        .collect();
    let mut rest = vec![Complex::new(0.0, 0.0); d * d];
    for i in 0..d {
        rest[i * d + i] = Complex::new(1.0, 0.0);
    }
    for e in &elems {
        for (r, x) in rest.iter_mut().zip(e) {
            *r -= x;
        }
    }
    for (e0, r) in elems[0].iter_mut().zip(&rest) {
        *e0 += r;
    }
    Ok(elems)
}
