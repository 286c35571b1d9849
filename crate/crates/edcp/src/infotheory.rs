//! Holevo and Fano bounds for the EDCP ensemble, checked against dense spectra.

use serde::{Deserialize, Serialize};

use crate::coset::{Challenger, EdcpParams};
use crate::error::{Error, Result};
use crate::modmath::ZqVector;
use crate::statevec::DensityOperator;

/// Largest total dimension (r·q^n)^m for the numeric branch.
pub const HOLEVO_DENSE_CAP: u64 = 256;
const SPECTRUM_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub params: EdcpParams,
    pub m: u32,
    pub chi_numeric: f64,
    pub chi_closed_form: f64,
    /// Spectrum of ρ_{s,r} for s = 0, then of the average over s.
    pub spectra: [Vec<(f64, usize)>; 2],
}

/// m(1 − q^{−n}) log₂ r.
pub fn chi_closed_form(params: &EdcpParams, m: u32) -> f64 {
    let qn = (params.q() as f64).powi(params.n() as i32);
    m as f64 * (1.0 - 1.0 / qn) * (params.r() as f64).log2()
}

fn qn(params: &EdcpParams) -> u64 {
    params.q().pow(params.n() as u32)
}

/// ρ_{s,r}: the uniform mixture over x of the coset states for s.
pub fn coset_density(params: &EdcpParams, s: &ZqVector) -> Result<DensityOperator<f64>> {
    let mut ch = Challenger::with_secret(params.clone(), s.clone(), 0)?;
    let count = qn(params) as usize;
    let members = (0..count)
        .map(|i| {
            let x = ZqVector::from_index(params.q(), params.n(), i);
            Ok((
                1.0 / count as f64,
                ch.sample_with_offset(x, None)?.to_dense::<f64>()?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    DensityOperator::from_ensemble(&members)
}

fn per_secret(params: &EdcpParams, m: u32) -> Result<Vec<DensityOperator<f64>>> {
    let d = (params.r() * qn(params)) as u128;
    let total = d.pow(m);
    if m == 0 || total > HOLEVO_DENSE_CAP as u128 {
        return Err(Error::DimensionCap {
            dim: total,
            cap: HOLEVO_DENSE_CAP,
        });
    }
    ZqVector::enumerate(params.q(), params.n())
        .map(|s| {
            let rho = coset_density(params, &s)?;
            let mut out = rho.clone();
            for _ in 1..m {
                out = out.kron(&rho)?;
            }
            Ok(out)
        })
        .collect()
}

/// χ of the m-fold ensemble, numerically and in closed form.
pub fn holevo_chi(params: &EdcpParams, m: u32) -> Result<EnsembleReport> {
    let rhos = per_secret(params, m)?;
    let avg = DensityOperator::average(&rhos)?;
    let mean_entropy = rhos.iter().map(|r| r.entropy()).sum::<f64>() / rhos.len() as f64;
    Ok(EnsembleReport {
        params: params.clone(),
        m,
        chi_numeric: avg.entropy() - mean_entropy,
        chi_closed_form: chi_closed_form(params, m),
        spectra: [rhos[0].eigen_spectrum(), avg.eigen_spectrum()],
    })
}

/// ⌈(p·n·log₂ q − 1) / ((1 − q^{−n}) log₂ r)⌉, floored at 0.
pub fn fano_min_samples(params: &EdcpParams, success_p: f64) -> Result<u64> {
    if !(success_p > 0.0 && success_p <= 1.0) {
        return Err(Error::InvalidOperation(format!(
            "success probability {success_p} not in (0, 1]"
        )));
    }
    let per_sample = chi_closed_form(params, 1);
    let need = success_p * params.n() as f64 * (params.q() as f64).log2() - 1.0;
    let ratio = need / per_sample;
    Ok((ratio - 1e-9).ceil().max(0.0) as u64)
}

fn matches(got: &[f64], want: &[f64]) -> bool {
    got.len() == want.len()
        && got
            .iter()
            .zip(want)
            .all(|(a, b)| (a - b).abs() <= SPECTRUM_TOL)
}

/// ρ_{s,r} has q^{−n} with multiplicity q^n and 0 otherwise; the average has
/// q^{−n} once, (rq^n)^{−1} with multiplicity (q^n − 1)r, and r − 1 zeros.
pub fn spectrum_check(params: &EdcpParams) -> Result<bool> {
    let rhos = per_secret(params, 1)?;
    let (qn, r) = (qn(params) as usize, params.r() as usize);
    let qinv = 1.0 / qn as f64;
    let mut single = vec![qinv; qn];
    single.resize(r * qn, 0.0);
    let mut avg_want = vec![qinv];
    avg_want.extend(std::iter::repeat(qinv / r as f64).take((qn - 1) * r));
    avg_want.resize(r * qn, 0.0);
    avg_want.sort_by(|a, b| b.total_cmp(a));
    if !rhos.iter().all(|rho| matches(&rho.eigenvalues(), &single)) {
        return Ok(false);
    }
    Ok(matches(
        &DensityOperator::average(&rhos)?.eigenvalues(),
        &avg_want,
    ))
}
