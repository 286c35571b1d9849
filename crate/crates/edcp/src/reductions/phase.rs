//! Search via phase decisions: a wrong digit guess leaves an ω_p phase on the sample.

use rand::Rng;

use super::{verify_secret, DecisionOracle, SearchReport};
use crate::coset::{Challenger, CosetState, LinearForm};
use crate::error::{Error, Result};
use crate::modmath::{crt_reconstruct, ZqVector};

const VERIFY_ROUNDS: usize = 16;

/// Apply U_{c,y,k}: |j⟩|a⟩ ↦ ω_{p^{k+1}}^{(a_coord − j·s̃ − j·p^k·y)·c} |j⟩|a⟩.
pub fn phase_candidate(
    st: CosetState,
    coord: usize,
    p: u64,
    k: u32,
    partial: u64,
    y: u64,
    c: u64,
) -> Result<CosetState> {
    let m = p.pow(k + 1);
    let j_coeff = (partial + p.pow(k) * y) % m * c % m;
    let mut ys = vec![0; st.params().n()];
    ys[coord] = c % m;
    st.adversary_phase(&LinearForm::new(m, (m - j_coeff) % m, ys))
}

pub fn search_via_phase<O: DecisionOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    ch: &mut Challenger,
    rng: &mut R,
) -> Result<SearchReport> {
    let params = ch.params().clone();
    let (q, n) = (params.q(), params.n());
    let issued0 = ch.issued();
    let queries0 = oracle.queries();

    let mut residues = Vec::new();
    for &(p, e) in params.modulus().factors() {
        let mut coords = Vec::with_capacity(n);
        for coord in 0..n {
            let mut partial = 0;
            for k in 0..e {
                let mut found = None;
                for y in 0..p {
                    let mut src = || {
                        let c = rng.gen_range(1..p);
                        phase_candidate(ch.sample(None)?, coord, p, k, partial, y, c)
                    };
                    if oracle.decide(&mut src)? {
                        found = Some(y);
                        break;
                    }
                }
                let y = found.ok_or_else(|| {
                    Error::ReductionFailed(format!(
                        "no digit accepted at p = {p}, coordinate {coord}, position {k}"
                    ))
                })?;
                partial += p.pow(k) * y;
            }
            coords.push(partial);
        }
        residues.push(ZqVector::new(p.pow(e), coords));
    }
    let s = crt_reconstruct(&residues)?;
    let secret = ZqVector::new(q, s.coords().to_vec());
    let verified = verify_secret(ch, &secret, VERIFY_ROUNDS, rng)?;
    Ok(SearchReport {
        secret,
        samples: ch.issued() - issued0,
        oracle_queries: oracle.queries() - queries0,
        critical_levels: Vec::new(),
        verified,
    })
}
