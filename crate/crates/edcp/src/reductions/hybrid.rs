//! Search via hybrid levels: j mod p^k is measured to thin the support, and
//! a digit guess is tested by whether it thins the support one level further.

use rand::Rng;

use super::{reduced_sample, verify_secret, DecisionOracle, SearchReport};
use crate::coset::{Challenger, CosetState, EdcpParams, LinearForm};
use crate::error::{Error, Result};
use crate::modmath::{crt_reconstruct, solve_linear_mod, LinearSolution, Modulus, ZqVector};
use crate::statevec::Direction;

const FOURIER_ROUNDS: usize = 8;
const VERIFY_ROUNDS: usize = 16;

/// Largest r' ≤ r with r' ≤ p_i^{e_i} for every prime and r'^k ≤ r, where k
/// counts the primes below r.
pub fn hybrid_r_prime(params: &EdcpParams) -> Result<u64> {
    let r = params.r();
    let factors = params.modulus().factors();
    let k = factors.iter().filter(|(p, _)| *p < r).count() as u32;
    let cap = factors
        .iter()
        .map(|&(p, e)| p.pow(e))
        .min()
        .unwrap_or(1)
        .min(r);
    (2..=cap)
        .rev()
        .find(|&rp| rp.checked_pow(k).is_some_and(|v| v <= r))
        .ok_or_else(|| {
            Error::BadParams(format!(
                "no admissible r' ≥ 2 for r = {r}, q = {}",
                params.q()
            ))
        })
}

/// A sample of μ^k: reduce to width r', then measure j mod p^k.
pub fn level_sample<R: Rng + ?Sized>(
    ch: &mut Challenger,
    r_prime: u64,
    p: u64,
    k: u32,
    rng: &mut R,
) -> Result<CosetState> {
    let st = reduced_sample(ch, r_prime, rng)?;
    if k == 0 {
        return Ok(st);
    }
    Ok(st.project_j_mod(p.pow(k), rng)?.1)
}

/// Minimal t in (0, h] where the oracle separates μ^{t−1} from μ^t, together
/// with the oracle's verdict on μ^{t−1}.
pub fn find_critical_t<O: DecisionOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    ch: &mut Challenger,
    r_prime: u64,
    p: u64,
    h: u32,
    rng: &mut R,
) -> Result<(u32, bool)> {
    let mut verdicts = Vec::with_capacity(h as usize + 1);
    for k in 0..=h {
        let mut src = || level_sample(ch, r_prime, p, k, rng);
        verdicts.push(oracle.decide(&mut src)?);
    }
    if verdicts[0] == verdicts[h as usize] {
        return Err(Error::NoGapFound);
    }
    let t = (1..=h)
        .find(|&t| verdicts[t as usize] != verdicts[t as usize - 1])
        .unwrap();
    Ok((t, verdicts[t as usize - 1]))
}

/// Measure (y_coord − j·s̃ − j·p^{k−1}·a) mod p^{t+k−1} and drop the result.
#[allow(clippy::too_many_arguments)]
pub fn digit_transform<R: Rng + ?Sized>(
    st: CosetState,
    coord: usize,
    p: u64,
    t: u32,
    k: u32,
    partial: u64,
    a: u64,
    rng: &mut R,
) -> Result<CosetState> {
    let e = st.params().modulus().exponent_of(p);
    if t + k - 1 > e {
        return Err(Error::LevelOverflow {
            level: t + k - 1,
            exponent: e,
        });
    }
    let form = digit_form(
        st.params().n(),
        coord,
        p,
        t + k - 1,
        p.pow(k - 1) * a + partial,
    );
    Ok(st.measure_linear(&form, rng)?.1)
}

/// The form (y_coord − j·guess) mod p^exp.
pub(crate) fn digit_form(n: usize, coord: usize, p: u64, exp: u32, guess: u64) -> LinearForm {
    let m = p.pow(exp);
    let mut y = vec![0; n];
    y[coord] = 1;
    LinearForm::new(m, (m - guess % m) % m, y)
}

/// True iff digit k (1-based) of s_coord in base p equals `a`, given the lower digits `partial`.
#[allow(clippy::too_many_arguments)]
pub fn hybrid_digit_test<O: DecisionOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    ch: &mut Challenger,
    r_prime: u64,
    p: u64,
    (t, prev_verdict): (u32, bool),
    coord: usize,
    k: u32,
    partial: u64,
    a: u64,
    rng: &mut R,
) -> Result<bool> {
    let e = ch.params().modulus().exponent_of(p);
    if t + k - 1 > e {
        return Err(Error::LevelOverflow {
            level: t + k - 1,
            exponent: e,
        });
    }
    let mut src = || {
        let st = level_sample(ch, r_prime, p, t - 1, rng)?;
        digit_transform(st, coord, p, t, k, partial, a, rng)
    };
    Ok(oracle.decide(&mut src)? == prev_verdict)
}

/// Recover the secret with a decision oracle for width r'.
pub fn search_via_hybrid<O: DecisionOracle + ?Sized, R: Rng + ?Sized>(
    oracle: &mut O,
    ch: &mut Challenger,
    rng: &mut R,
) -> Result<SearchReport> {
    let params = ch.params().clone();
    let (q, n) = (params.q(), params.n());
    let issued0 = ch.issued();
    let queries0 = oracle.queries();
    let r_prime = hybrid_r_prime(&params)?;

    let mut residues = Vec::new();
    let mut levels = Vec::new();
    for &(p, e) in params.modulus().factors() {
        let h = (1..=e).find(|&h| r_prime <= p.pow(h)).unwrap_or(e);
        let crit = find_critical_t(oracle, ch, r_prime, p, h, rng)?;
        levels.push((p, crit.0));
        let digits = e - crit.0 + 1;
        let mut coords = Vec::with_capacity(n);
        for coord in 0..n {
            let mut partial = 0;
            for k in 1..=digits {
                let mut found = None;
                for a in 0..p {
                    if hybrid_digit_test(oracle, ch, r_prime, p, crit, coord, k, partial, a, rng)? {
                        found = Some(a);
                        break;
                    }
                }
                let a = found.ok_or_else(|| {
                    Error::ReductionFailed(format!(
                        "no digit accepted at p = {p}, coordinate {coord}, position {k}"
                    ))
                })?;
                partial += p.pow(k - 1) * a;
            }
            coords.push(partial);
        }
        residues.push(ZqVector::new(p.pow(digits), coords));
    }

    let partial = crt_reconstruct(&residues)?;
    let v = partial.modulus();
    let lifted = ZqVector::new(q, partial.coords().to_vec());
    let secret = if v == q {
        lifted
    } else {
        fourier_completion(ch, &lifted, v, rng)?
    };
    let verified = verify_secret(ch, &secret, VERIFY_ROUNDS, rng)?;
    Ok(SearchReport {
        secret,
        samples: ch.issued() - issued0,
        oracle_queries: oracle.queries() - queries0,
        critical_levels: levels,
        verified,
    })
}

/// Given s̃ = s mod v, recover s from ⟨u, (s − s̃)/v⟩ mod q/v equations.
fn fourier_completion<R: Rng + ?Sized>(
    ch: &mut Challenger,
    partial: &ZqVector,
    v: u64,
    rng: &mut R,
) -> Result<ZqVector> {
    let (q, n, r) = (ch.params().q(), ch.params().n(), ch.params().r());
    let qp = q / v;
    if qp > r {
        return Err(Error::ReductionFailed(format!(
            "q/v = {qp} exceeds r = {r}"
        )));
    }
    let modulus = Modulus::new(qp)?;
    let mut eqs = Vec::new();
    for _ in 0..FOURIER_ROUNDS {
        for _ in 0..4 * n {
            let st = reduced_sample(ch, qp, rng)?.multiply_subtract(partial)?;
            let (u, st) = st.fourier_measure_second(rng)?;
            let k = st.qft_first_measure(Direction::Inverse, rng)?;
            eqs.push((u.reduce(qp), k));
        }
        match solve_linear_mod(&eqs, &modulus) {
            Ok(LinearSolution::Unique(w)) => {
                return Ok(partial.add(&ZqVector::new(q, w.coords().to_vec()).scale(v)));
            }
            Ok(LinearSolution::Underdetermined) => continue,
            Err(e) => return Err(Error::ReductionFailed(format!("Fourier stage: {e}"))),
        }
    }
    Err(Error::ReductionFailed(
        "Fourier stage stayed underdetermined".into(),
    ))
}
