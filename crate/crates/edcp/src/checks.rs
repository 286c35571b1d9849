//! The acceptance criteria as runnable checks, shared by the test suite and `selftest`.
//!
//! `scale` multiplies every trial count (1.0 is the full suite). Statistical
//! tolerances widen with 1/√scale so a reduced run keeps the same confidence.

use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacks::{
    edcp_to_phase, fourier_attack_r_eq_q, kuperberg_pool_exponent, kuperberg_recover,
    pgm_povm_dense, sieve_combine, sieve_combine_dense,
};
use crate::coset::dense::{DenseCoset, Fault};
use crate::coset::program::{compare_engines, run_symbolic, sample_dense_tree, Op};
use crate::coset::{Challenger, CosetState, EdcpParams, LinearForm};
use crate::error::Result;
use crate::infotheory::{fano_min_samples, holevo_chi, spectrum_check};
use crate::modmath::{wrapped_gaussian_pmf, ZqVector, GAUSSIAN_KAPPA};
use crate::qpke::roundtrip_batch;
use crate::reductions::{
    extract_shifted_lwe, extraction_success_probability, search_via_hybrid, search_via_phase,
    PerfectOracle,
};
use crate::rng::{derive_seed, seeded, trial_rng};
use crate::statevec::{DensityOperator, Direction, IndexSpace};

pub const CRITERIA: u32 = 11;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    pub scale: f64,
    /// Injected into the dense engine only.
    pub fault: Fault,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 2024,
            scale: 1.0,
            fault: Fault::None,
        }
    }
}

impl CheckConfig {
    fn trials(&self, full: u64) -> u64 {
        ((full as f64 * self.scale).round() as u64).clamp(1, full.max(1))
    }

    fn widen(&self, full: u64) -> f64 {
        (full as f64 / self.trials(full) as f64).sqrt()
    }

    fn seed_for(&self, id: u32) -> u64 {
        derive_seed(self.seed, id as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{tag}] {:>2} {:<22} {}",
            self.id, self.name, self.detail
        )
    }
}

pub fn check_name(id: u32) -> &'static str {
    match id {
        1 => "correctness",
        2 => "spectrum",
        3 => "holevo",
        4 => "self-reduction",
        5 => "hybrid-search",
        6 => "phase-search",
        7 => "lwe-extraction",
        8 => "sieve-probability",
        9 => "end-to-end-attacks",
        10 => "engine-equivalence",
        11 => "desk-scale-substitutes",
        _ => "unknown",
    }
}

type Outcome = Result<(bool, String)>;

/// Run one criterion; internal errors count as failures.
pub fn run_check(id: u32, cfg: &CheckConfig) -> CheckResult {
    let outcome = match id {
        1 => correctness(cfg),
        2 => spectrum(),
        3 => holevo(),
        4 => self_reduction(cfg),
        5 => hybrid_search(cfg),
        6 => phase_search(cfg),
        7 => lwe_extraction(cfg),
        8 => sieve_probability(cfg),
        9 => end_to_end(cfg),
        10 => engine_equivalence(cfg),
        11 => desk_scale(cfg),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult {
        id,
        name: check_name(id).into(),
        passed,
        detail,
    }
}

pub fn run_all(cfg: &CheckConfig) -> Vec<CheckResult> {
    (1..=CRITERIA).map(|id| run_check(id, cfg)).collect()
}

fn params(n: usize, q: u64, r: u64) -> Result<EdcpParams> {
    EdcpParams::with_smallest_prime(n, q, r)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed()))
}

fn correctness(cfg: &CheckConfig) -> Outcome {
    let trials = cfg.trials(10_000);
    let sets = [EdcpParams::new(2, 8, 2, 2)?, EdcpParams::new(1, 27, 9, 3)?];
    let (failures, elapsed) = timed(|| {
        let mut failures = 0;
        for (i, p) in sets.iter().enumerate() {
            for b in 0..2u8 {
                let master = derive_seed(cfg.seed_for(1), (2 * i + b as usize) as u64);
                failures += roundtrip_batch(p, b, trials, master)?
                    .iter()
                    .filter(|t| !t.ok)
                    .count();
            }
        }
        Ok(failures)
    })?;
    let in_time = elapsed <= Duration::from_secs(30);
    Ok((
        failures == 0 && in_time,
        format!(
            "{failures} failures in {} roundtrips{}",
            4 * trials,
            if in_time { "" } else { ", over 30 s" }
        ),
    ))
}

const SPECTRAL_SETS: [(usize, u64, u64); 3] = [(1, 4, 2), (1, 9, 3), (2, 4, 2)];

fn spectrum() -> Outcome {
    let mut bad = Vec::new();
    for (n, q, r) in SPECTRAL_SETS {
        if !spectrum_check(&params(n, q, r)?)? {
            bad.push(format!("({n},{q},{r})"));
        }
    }
    Ok((
        bad.is_empty(),
        if bad.is_empty() {
            "3/3 parameter sets".into()
        } else {
            format!("mismatch at {}", bad.join(" "))
        },
    ))
}

fn holevo() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut first = 0.0;
    for (i, (n, q, r)) in SPECTRAL_SETS.into_iter().enumerate() {
        let rep = holevo_chi(&params(n, q, r)?, 1)?;
        if i == 0 {
            first = rep.chi_numeric;
        }
        worst = worst.max((rep.chi_numeric - rep.chi_closed_form).abs());
    }
    Ok((
        worst < 1e-8,
        format!("chi(1,4,2) = {first:.10} bits, max deviation {worst:.1e}"),
    ))
}

/// ⟨j,y|ρ_{s,r}|k,y'⟩ = 1/(r q^n) when y − js = y' − ks.
fn dense_coset_density(r: u64, q: u64, n: usize, s: &ZqVector) -> Result<DensityOperator<f64>> {
    let space = IndexSpace::edcp(r, q, n)?;
    let qn = q.pow(n as u32) as usize;
    let d = space.dim();
    let keys: Vec<ZqVector> = (0..d)
        .map(|a| ZqVector::from_index(q, n, a % qn).sub(&s.scale((a / qn) as u64)))
        .collect();
    let mut m = vec![Complex::new(0.0, 0.0); d * d];
    for a in 0..d {
        for b in 0..d {
            if keys[a] == keys[b] {
                m[a * d + b] = Complex::new(1.0 / d as f64, 0.0);
            }
        }
    }
    DensityOperator::from_matrix(space, m)
}

fn self_reduction(cfg: &CheckConfig) -> Outcome {
    let full = 10_000;
    let trials = cfg.trials(full);
    let pairs: Vec<(u64, u64)> = (2..=16u64)
        .flat_map(|r| (1..=r).map(move |t| (r, t)))
        .collect();
    let seed = cfg.seed_for(4);
    let freqs = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(r, target))| {
            let mut ch = Challenger::new(params(1, 16, r)?, derive_seed(seed, i as u64));
            let mut rng = trial_rng(seed, 1000 + i as u64);
            let mut ok = 0;
            for _ in 0..trials {
                ok += ch.sample(None)?.reduce_r(target, &mut rng)?.0 as u64;
            }
            Ok(ok as f64 / trials as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let sigma = (0.25 / trials as f64).sqrt();
    let min_freq = freqs.iter().cloned().fold(1.0, f64::min);
    let freq_ok = min_freq >= 0.5 - 3.0 * sigma;

    // post-selected output ensembles against ρ_{s,r'} at n = 1, q = 8
    let q = 8u64;
    let mut rng = seeded(seed);
    let mut worst: f64 = 0.0;
    for r in 2..=q {
        for target in 1..=r {
            let s = ZqVector::random(q, 1, &mut rng);
            let mut ch = Challenger::with_secret(params(1, q, r)?, s.clone(), 0)?;
            let mut members = Vec::new();
            for x in ZqVector::enumerate(q, 1) {
                let st = ch.sample_with_offset(x, None)?;
                let dense = DenseCoset::from_symbolic(&st)?.with_fault(cfg.fault);
                for b in dense.reduce_r_branches(target)? {
                    if CosetState::reduce_succeeded(r, target, b.outcome) && b.probability > 0.0 {
                        members.push((
                            b.probability,
                            b.state.expect("successful branch keeps its state").state,
                        ));
                    }
                }
            }
            let total: f64 = members.iter().map(|m| m.0).sum();
            members.iter_mut().for_each(|m| m.0 /= total);
            let got = DensityOperator::from_ensemble(&members)?;
            worst = worst.max(got.trace_distance(&dense_coset_density(target, q, 1, &s)?)?);
        }
    }
    Ok((
        freq_ok && worst < 1e-9,
        format!(
            "min success {min_freq:.4} (bound {:.4}) over {} pairs, ensemble distance {worst:.1e}",
            0.5 - 3.0 * sigma,
            pairs.len()
        ),
    ))
}

fn search_instances<F>(cfg: &CheckConfig, id: u32, sets: &[(usize, u64, u64)], search: F) -> Outcome
where
    F: Fn(&mut Challenger, &mut rand_chacha::ChaCha8Rng) -> Result<crate::reductions::SearchReport>
        + Sync,
{
    let runs = cfg.trials(50);
    let seed = cfg.seed_for(id);
    let mut parts = Vec::new();
    let mut all = true;
    for (k, &(n, q, r)) in sets.iter().enumerate() {
        let p = params(n, q, r)?;
        let ok = (0..runs)
            .into_par_iter()
            .map(|i| {
                let idx = (k as u64) << 32 | i;
                let mut ch = Challenger::new(p.clone(), derive_seed(seed, idx));
                let mut rng = trial_rng(seed, idx);
                let rep = search(&mut ch, &mut rng)?;
                Ok(ch.is_secret(&rep.secret) as u64)
            })
            .collect::<Result<Vec<u64>>>()?
            .into_iter()
            .sum::<u64>();
        all &= ok == runs;
        parts.push(format!("({n},{q},{r}) {ok}/{runs}"));
    }
    Ok((all, parts.join(", ")))
}

fn hybrid_search(cfg: &CheckConfig) -> Outcome {
    let (res, elapsed) = timed(|| {
        search_instances(cfg, 5, &[(1, 9, 3), (1, 36, 2), (2, 8, 2)], |ch, rng| {
            search_via_hybrid(&mut PerfectOracle::new(), ch, rng)
        })
    })?;
    let in_time = elapsed <= Duration::from_secs(120);
    Ok((
        res.0 && in_time,
        if in_time {
            res.1
        } else {
            format!("{}, over 2 min", res.1)
        },
    ))
}

fn phase_search(cfg: &CheckConfig) -> Outcome {
    search_instances(cfg, 6, &[(1, 4, 2), (1, 6, 2)], |ch, rng| {
        search_via_phase(&mut PerfectOracle::new(), ch, rng)
    })
}

fn lwe_extraction(cfg: &CheckConfig) -> Outcome {
    let (q, r, lambda) = (97u64, 9u64, 9.0);
    let attempts = cfg.trials(10_000);
    let seed = cfg.seed_for(7);
    let mut ch = Challenger::new(EdcpParams::new(1, q, r, q)?, seed);
    let s = ch.reveal_secret().clone();
    let mut rng = trial_rng(seed, 1);
    let mut hist = vec![0u64; q as usize];
    let mut got = 0u64;
    for _ in 0..attempts {
        let t = rng.gen_range(0..q);
        let out = extract_shifted_lwe(ch.sample(Some(t))?, lambda, &mut rng)?;
        if let Some(smp) = out.sample {
            got += 1;
            hist[((smp.b + t + q - smp.a.dot(&s)) % q) as usize] += 1;
        }
    }
    let rate = got as f64 / attempts as f64;
    let floor = 0.5 * extraction_success_probability(r, lambda);
    let pmf = wrapped_gaussian_pmf(q as f64 / lambda, q, GAUSSIAN_KAPPA);
    let tv = hist
        .iter()
        .zip(&pmf)
        .map(|(&h, &p)| (h as f64 / got.max(1) as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    let tv_bound = 0.1 * cfg.widen(10_000);
    Ok((
        rate >= floor && tv < tv_bound,
        format!("success {rate:.4} (floor {floor:.4}), error TV {tv:.4}"),
    ))
}

fn sieve_probability(cfg: &CheckConfig) -> Outcome {
    let trials = cfg.trials(10_000);
    let seed = cfg.seed_for(8);
    let mut ch = Challenger::new(params(1, 8, 4)?, seed);
    let mut rng = trial_rng(seed, 1);
    let (mut succ, mut label_ok, mut dense_ok) = (0u64, true, true);
    for i in 0..trials {
        let a = edcp_to_phase(&mut ch, &mut rng)?;
        let b = edcp_to_phase(&mut ch, &mut rng)?;
        let diff = a.label().sub(b.label());
        let (da, db) = (a.to_dense()?, b.to_dense()?);
        let coin = derive_seed(seed, 2 + i);
        let (ok, out) = sieve_combine(a, b, &mut seeded(coin))?;
        let (dok, dout) = sieve_combine_dense(&da, &db, &mut seeded(coin))?;
        dense_ok &= ok == dok && out.to_dense()?.equal_up_to_phase(&dout, 1e-9);
        if ok {
            succ += 1;
            label_ok &= *out.label() == diff;
        }
    }
    let f = succ as f64 / trials as f64;
    let tol = 0.015 * cfg.widen(10_000);
    Ok((
        (f - 0.5).abs() <= tol && label_ok && dense_ok,
        format!(
            "success {f:.4} over {trials}, labels {}, dense {}",
            ok_word(label_ok),
            ok_word(dense_ok)
        ),
    ))
}

fn ok_word(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISMATCH"
    }
}

fn end_to_end(cfg: &CheckConfig) -> Outcome {
    let seed = cfg.seed_for(9);
    let runs = cfg.trials(1000);
    let p = params(2, 5, 5)?;
    let fourier_ok = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut ch = Challenger::new(p.clone(), derive_seed(seed, i));
            let rep = fourier_attack_r_eq_q(&mut ch, &mut trial_rng(seed, i))?;
            Ok((ch.is_secret(&rep.secret) && rep.samples <= 8) as u64)
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum::<u64>();
    let fourier_rate = fourier_ok as f64 / runs as f64;

    let sieve_runs = cfg.trials(50);
    let (ok, _) = sieve_runs_n2_q16(seed, sieve_runs)?;
    let sieve_rate = ok as f64 / sieve_runs as f64;

    let mut rng = trial_rng(seed, 1 << 40);
    let mut completeness: f64 = 0.0;
    for t in 1..=6usize {
        let labels: Vec<u64> = (0..t).map(|_| rng.gen_range(0..16)).collect();
        let povm = pgm_povm_dense(&labels, 16)?;
        let d = 1usize << t;
        for i in 0..d {
            for j in 0..d {
                let s: Complex<f64> = povm.iter().map(|e| e[i * d + j]).sum();
                completeness = completeness.max((s - if i == j { 1.0 } else { 0.0 }).norm());
            }
        }
    }
    Ok((
        fourier_rate >= 0.99 && sieve_rate >= 0.5 && completeness < 1e-8,
        format!(
            "fourier {fourier_ok}/{runs} in <= 8 samples, sieve+pgm {ok}/{sieve_runs}, povm completeness {completeness:.1e}"
        ),
    ))
}

/// Sieve + PGM on s_2 at n = 2, q = 16; returns (successes, mean survivors/pool).
fn sieve_runs_n2_q16(seed: u64, runs: u64) -> Result<(u64, f64)> {
    let p = params(2, 16, 2)?;
    let ell = kuperberg_pool_exponent(2, 16, 1);
    let reports = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut ch = Challenger::new(p.clone(), derive_seed(seed, 1 << 20 | i));
            kuperberg_recover(&mut ch, 1, 1, ell, &mut trial_rng(seed, 1 << 20 | i))
        })
        .collect::<Result<Vec<_>>>()?;
    let ok = reports.iter().filter(|r| r.correct).count() as u64;
    let ratio = reports
        .iter()
        .map(|r| r.survivors[0] as f64 / r.pool as f64)
        .sum::<f64>()
        / runs as f64;
    Ok((ok, ratio))
}

fn divisors(q: u64) -> Vec<u64> {
    (1..=q).filter(|d| q % d == 0).collect()
}

fn random_form<R: Rng + ?Sized>(q: u64, n: usize, rng: &mut R) -> LinearForm {
    let ds = divisors(q);
    let m = ds[rng.gen_range(0..ds.len())];
    LinearForm::new(
        m,
        rng.gen_range(0..m),
        (0..n).map(|_| rng.gen_range(0..m)).collect(),
    )
}

/// Five ops with at most one Fourier step; a terminal op can only come last.
pub fn random_program<R: Rng + ?Sized>(params: &EdcpParams, rng: &mut R) -> Vec<Op> {
    let (q, n) = (params.q(), params.n());
    let mut width = params.r();
    let mut fourier = false;
    let mut ops = Vec::new();
    while ops.len() < 5 {
        let last = ops.len() == 4;
        let op = match rng.gen_range(0..9) {
            0 => {
                let t = rng.gen_range(1..=width);
                width = t;
                Op::ReduceR(t)
            }
            1 => Op::ProjectJ(rng.gen_range(1..=width)),
            2 => Op::Phase(random_form(q, n, rng)),
            3 => Op::Subtract(ZqVector::random(q, n, rng)),
            4 => Op::Measure(random_form(q, n, rng)),
            5 => Op::MeasureSecond,
            6 if !fourier => {
                fourier = true;
                Op::FourierSecond
            }
            7 if last => Op::QftFirst(if rng.gen() {
                Direction::Forward
            } else {
                Direction::Inverse
            }),
            8 if last => Op::MeasureFull,
            _ => continue,
        };
        ops.push(op);
    }
    ops
}

fn engine_equivalence(cfg: &CheckConfig) -> Outcome {
    let programs = cfg.trials(200);
    let seed = cfg.seed_for(10);
    let coupled_per_program = 50;
    let results = (0..programs)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let n = rng.gen_range(1..=2usize);
            let q = rng.gen_range(2..=9u64);
            let r = rng.gen_range(2..=q);
            let p = params(n, q, r)?;
            let mut ch = Challenger::new(p.clone(), derive_seed(seed, i));
            let t = rng.gen_range(0..p.p());
            let x = ZqVector::random(q, n, &mut rng);
            let ops = random_program(&p, &mut rng);
            let fresh = ch.sample_with_offset(x, Some(t))?;
            let dense = DenseCoset::from_symbolic(&fresh)?.with_fault(cfg.fault);
            let cmp = compare_engines(&fresh, &dense, &ops)?;
            let mut mismatches = 0;
            for k in 0..coupled_per_program {
                let draw = derive_seed(seed, (i << 16) | k);
                let (a, _) = run_symbolic(fresh.duplicate(), &ops, &mut seeded(draw))?;
                mismatches += (a != sample_dense_tree(&cmp.dense_tree, &mut seeded(draw))) as u64;
            }
            Ok((cmp.tv, cmp.max_state_error, mismatches))
        })
        .collect::<Result<Vec<_>>>()?;
    let tv = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let err = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let mismatch =
        results.iter().map(|r| r.2).sum::<u64>() as f64 / (programs * coupled_per_program) as f64;

    // a program whose outcome distribution is sensitive to the QFT sign
    let p = params(1, 9, 9)?;
    let mut ch = Challenger::with_secret(p, ZqVector::new(9, vec![4]), 0)?;
    let probe = ch.sample_with_offset(ZqVector::new(9, vec![1]), Some(1))?;
    let probe_cmp = compare_engines(
        &probe,
        &DenseCoset::from_symbolic(&probe)?.with_fault(cfg.fault),
        &[Op::FourierSecond, Op::QftFirst(Direction::Forward)],
    )?;

    let bound = 4.0 / 100.0;
    Ok((
        tv < bound && err < 1e-9 && mismatch < bound && probe_cmp.tv < bound,
        format!(
            "{programs} programs: max TV {tv:.1e}, max state error {err:.1e}, coupled mismatch {mismatch:.4}, probe TV {:.1e}",
            probe_cmp.tv
        ),
    ))
}

fn desk_scale(cfg: &CheckConfig) -> Outcome {
    let seed = cfg.seed_for(11);
    let runs = cfg.trials(20);
    let (_, ratio) = sieve_runs_n2_q16(seed, runs)?;

    let mut monotone = true;
    for &(n, q, r) in &[(1usize, 4u64, 2u64), (2, 16, 4), (3, 64, 8), (4, 256, 2)] {
        let p = params(n, q, r)?;
        let mut last = 0;
        for k in 1..=100 {
            let b = fano_min_samples(&p, k as f64 / 100.0)?;
            monotone &= b >= last;
            last = b;
        }
    }
    let at = |n: usize, q: u64, r: u64| -> Result<u64> { fano_min_samples(&params(n, q, r)?, 0.9) };
    monotone &= at(1, 64, 4)? <= at(2, 64, 4)? && at(2, 64, 4)? <= at(3, 64, 4)?;
    monotone &= at(2, 16, 4)? <= at(2, 256, 4)?;
    monotone &= at(2, 256, 2)? >= at(2, 256, 4)? && at(2, 256, 4)? >= at(2, 256, 16)?;
    Ok((
        ratio >= 0.125 && monotone,
        format!(
            "mean stage survival {ratio:.3} of pool (need >= 0.125), fano bound monotone: {}; asymptotic sieve cost and LWE hardness not measured",
            if monotone { "yes" } else { "no" }
        ),
    ))
}
