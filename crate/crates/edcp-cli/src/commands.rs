//! One function per subcommand.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use edcp::attacks::{
    edcp_to_phase, fourier_attack_r_eq_q, kuperberg_pool_exponent, kuperberg_recover, pgm_recover,
    pgm_success_probability, PGM_MAX_STATES,
};
use edcp::checks::{run_check, CheckConfig, CRITERIA};
use edcp::coset::dense::Fault;
use edcp::coset::Role;
use edcp::infotheory::{fano_min_samples, holevo_chi};
use edcp::modmath::{wrapped_gaussian_pmf, GAUSSIAN_KAPPA};
use edcp::qpke::{self, Ciphertext, PublicKey};
use edcp::reductions::{
    extract_shifted_lwe, extract_shifted_lwe_composite, extraction_success_probability,
    search_via_hybrid, search_via_phase, PerfectOracle, SearchReport, StatisticalOracle,
};
use edcp::rng::{derive_seed, seeded, trial_rng};
use edcp::{Challenger, CosetState, EdcpParams, ZqVector};
use rand::Rng;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::records::{
    read_json, summarize, write_csv, write_json, CiphertextFile, Header, KeyPairFile, RunRecord,
    TrialRow, SCHEMA_VERSION, SIMULATION_ONLY,
};
use crate::{FaultArg, OracleArg, OutputArgs, ParamArgs, RoleArg, SearchArgs};

/// Accumulates one experiment and renders it at the end.
struct Run<'a> {
    command: &'static str,
    params: EdcpParams,
    output: &'a OutputArgs,
    config: BTreeMap<String, serde_json::Value>,
    trials: Vec<TrialRow>,
    extra: BTreeMap<String, f64>,
    secrets: Vec<ZqVector>,
    start: Instant,
}

impl<'a> Run<'a> {
    fn new(command: &'static str, params: &EdcpParams, output: &'a OutputArgs) -> Self {
        Run {
            command,
            params: params.clone(),
            output,
            config: BTreeMap::new(),
            trials: Vec::new(),
            extra: BTreeMap::new(),
            secrets: Vec::new(),
            start: Instant::now(),
        }
    }

    fn config(mut self, key: &str, value: serde_json::Value) -> Self {
        self.config.insert(key.into(), value);
        self
    }

    /// Time `f` when timing is on; otherwise report 0.
    fn timed<T>(&self, f: impl FnOnce() -> T) -> (T, u64) {
        let t0 = Instant::now();
        let out = f();
        let us = if self.output.timing {
            t0.elapsed().as_micros() as u64
        } else {
            0
        };
        (out, us)
    }

    fn push(&mut self, seed: u64, outcome: impl Into<String>, samples_used: u64, elapsed_us: u64) {
        let trial = self.trials.len() as u64;
        self.trials.push(TrialRow {
            trial,
            seed,
            outcome: outcome.into(),
            samples_used,
            elapsed_us,
        });
    }

    fn finish(self) -> CliResult<()> {
        let role: Role = self.output.role.into();
        let mut aggregate = summarize(&self.trials);
        aggregate.extend(self.extra);
        let elapsed_us = if self.output.timing {
            self.start.elapsed().as_micros() as u64
        } else {
            0
        };
        let header = Header::of(&self.params);
        println!("{:<20} {}", "command", self.command);
        println!(
            "{:<20} n={} q={} r={} p={}",
            "params", header.n, header.q, header.r, header.p
        );
        if !self.trials.is_empty() {
            println!("{:<20} {}", "trials", self.trials.len());
        }
        for (k, v) in &aggregate {
            if self.trials.is_empty() && (k == "success_rate" || k == "mean_samples") {
                continue;
            }
            println!("{k:<20} {v}");
        }
        if self.output.timing {
            println!("{:<20} {elapsed_us}", "elapsed_us");
        }
        let record = RunRecord {
            schema_version: SCHEMA_VERSION,
            kind: "run".into(),
            role,
            label: (role == Role::Full).then(|| SIMULATION_ONLY.to_string()),
            command: self.command.into(),
            header,
            config: self.config,
            trials: self.trials,
            aggregate,
            secrets: (role == Role::Full && !self.secrets.is_empty()).then_some(self.secrets),
            elapsed_us,
        };
        if let Some(path) = &self.output.out {
            write_json(path, &record)?;
        }
        if let Some(path) = &self.output.csv {
            write_csv(path, &record.trials)?;
        }
        Ok(())
    }
}

fn ok_word(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "fail"
    }
}

// ---- cryptosystem ------------------------------------------------------

pub fn keygen(args: &ParamArgs, seed: u64, out: &Path, role: RoleArg) -> CliResult<()> {
    let params = args.qpke_params()?;
    let role: Role = role.into();
    let kp = qpke::keygen(params.clone(), &mut seeded(seed))?;
    let public = kp.public.state().map(|s| s.to_record(role));
    write_json(out, &KeyPairFile::new(&params, role, &kp.secret, public))?;
    println!("wrote key pair to {} ({:?})", out.display(), role);
    Ok(())
}

fn read_full_key(path: &Path) -> CliResult<(EdcpParams, KeyPairFile)> {
    let kf: KeyPairFile = read_json(path, "keypair")?;
    if kf.role != Role::Full {
        return Err(CliError::invalid(
            "--key",
            "an adversary-view key file carries no usable state",
        ));
    }
    Ok((kf.header.params()?, kf))
}

fn state_from(
    rec: edcp::coset::CosetRecord,
    params: &EdcpParams,
    path: &Path,
) -> CliResult<CosetState> {
    let st = CosetState::from_record(rec)?;
    if st.params() != params {
        return Err(CliError::Schema {
            path: path.display().to_string(),
            msg: "state parameters differ from header".into(),
        });
    }
    Ok(st)
}

pub fn encrypt(key: &Path, bit: u8, seed: u64, out: &Path, role: RoleArg) -> CliResult<()> {
    let (params, mut kf) = read_full_key(key)?;
    let Some(rec) = kf.public_key.take().filter(|_| !kf.consumed) else {
        return Err(CliError::invalid("--key", "public key already consumed"));
    };
    let role: Role = role.into();
    let mut pk = PublicKey::from_state(state_from(rec, &params, key)?);
    let ct = qpke::encrypt(&mut pk, bit, &mut seeded(seed))?;
    write_json(
        out,
        &CiphertextFile::new(&params, role, ct.state().to_record(role)),
    )?;
    kf.consumed = true;
    write_json(key, &kf)?;
    println!(
        "wrote ciphertext to {}; public key in {} is now consumed",
        out.display(),
        key.display()
    );
    Ok(())
}

pub fn decrypt(key: &Path, ct: &Path, seed: u64) -> CliResult<()> {
    let (params, kf) = read_full_key(key)?;
    let secret = kf
        .secret
        .ok_or_else(|| CliError::invalid("--key", "key file has no secret"))?;
    let cf: CiphertextFile = read_json(ct, "ciphertext")?;
    if cf.role != Role::Full {
        return Err(CliError::invalid(
            "--ct",
            "an adversary-view ciphertext carries no usable state",
        ));
    }
    if cf.header != kf.header {
        return Err(CliError::invalid(
            "--ct",
            "ciphertext and key headers differ",
        ));
    }
    let c = Ciphertext::from_state(state_from(cf.state, &params, ct)?);
    let b = qpke::decrypt(&secret, c, &mut seeded(seed))?;
    println!("bit {b}");
    Ok(())
}

pub fn roundtrip(
    args: &ParamArgs,
    trials: u64,
    bit: Option<u8>,
    seed: u64,
    output: &OutputArgs,
) -> CliResult<()> {
    let params = args.qpke_params()?;
    let bits = bit.map_or(vec![0, 1], |b| vec![b]);
    let mut run = Run::new("roundtrip", &params, output)
        .config("trials", json!(trials))
        .config("bits", json!(bits))
        .config("seed", json!(seed));
    for &b in &bits {
        let (batch, us) =
            run.timed(|| qpke::roundtrip_batch(&params, b, trials, derive_seed(seed, b as u64)));
        let per = us / trials.max(1);
        for t in batch? {
            run.push(t.seed, ok_word(t.ok), 1, per);
        }
    }
    run.finish()
}

// ---- reductions --------------------------------------------------------

pub enum Reduction {
    Hybrid,
    Phase,
}

pub fn reduce(args: &ParamArgs, search: &SearchArgs, which: Reduction) -> CliResult<()> {
    let params = args.params()?;
    let name = match which {
        Reduction::Hybrid => "reduce-hybrid",
        Reduction::Phase => "reduce-phase",
    };
    let oracle_name = match search.oracle {
        OracleArg::Perfect => "perfect",
        OracleArg::Statistical => "statistical",
    };
    let mut run = Run::new(name, &params, &search.output)
        .config("instances", json!(search.instances))
        .config("oracle", json!(oracle_name))
        .config("seed", json!(search.seed));
    let mut queries = 0u64;
    for i in 0..search.instances {
        let ts = derive_seed(search.seed, i);
        let mut ch = Challenger::new(params.clone(), derive_seed(ts, 0));
        let mut rng = trial_rng(ts, 1);
        let (rep, us) = run.timed(|| -> edcp::Result<SearchReport> {
            match (search.oracle, &which) {
                (OracleArg::Perfect, Reduction::Hybrid) => {
                    search_via_hybrid(&mut PerfectOracle::new(), &mut ch, &mut rng)
                }
                (OracleArg::Perfect, Reduction::Phase) => {
                    search_via_phase(&mut PerfectOracle::new(), &mut ch, &mut rng)
                }
                (OracleArg::Statistical, Reduction::Hybrid) => search_via_hybrid(
                    &mut StatisticalOracle::new(search.confidence, derive_seed(ts, 2)),
                    &mut ch,
                    &mut rng,
                ),
                (OracleArg::Statistical, Reduction::Phase) => search_via_phase(
                    &mut StatisticalOracle::new(search.confidence, derive_seed(ts, 2)),
                    &mut ch,
                    &mut rng,
                ),
            }
        });
        match rep {
            Ok(rep) => {
                queries += rep.oracle_queries;
                run.push(ts, ok_word(ch.is_secret(&rep.secret)), rep.samples, us);
            }
            Err(e) => run.push(ts, format!("error: {e}"), ch.issued(), us),
        }
        run.secrets.push(ch.reveal_secret().clone());
    }
    run.extra.insert(
        "mean_oracle_queries".into(),
        queries as f64 / search.instances.max(1) as f64,
    );
    run.finish()
}

pub fn extract_lwe(
    args: &ParamArgs,
    lambda: f64,
    trials: u64,
    seed: u64,
    output: &OutputArgs,
) -> CliResult<()> {
    let params = args.params()?;
    if !(lambda > 0.0) {
        return Err(CliError::invalid("--lambda", "must be positive"));
    }
    let (q, p) = (params.q(), params.p());
    let prime = params.modulus().is_prime();
    let mut run = Run::new("extract-lwe", &params, output)
        .config("lambda", json!(lambda))
        .config("trials", json!(trials))
        .config("seed", json!(seed));
    let mut ch = Challenger::new(params.clone(), derive_seed(seed, u64::MAX));
    let s = ch.reveal_secret().clone();
    let mut hist = vec![0u64; q as usize];
    for i in 0..trials {
        let ts = derive_seed(seed, i);
        let mut rng = trial_rng(ts, 0);
        let t = rng.gen_range(0..p);
        let st = ch.sample(Some(t))?;
        let (out, us) = run.timed(|| {
            if prime {
                extract_shifted_lwe(st, lambda, &mut rng)
            } else {
                extract_shifted_lwe_composite(st, lambda, &mut rng)
            }
        });
        let out = out?;
        if let Some(smp) = &out.sample {
            let e = (smp.b + t * (q / p) % q + q - smp.a.dot(&s)) % q;
            hist[e as usize] += 1;
        }
        run.push(ts, ok_word(out.success), 1, us);
    }
    let got: u64 = hist.iter().sum();
    let pmf = wrapped_gaussian_pmf(q as f64 / lambda, q, GAUSSIAN_KAPPA);
    let tv = hist
        .iter()
        .zip(&pmf)
        .map(|(&h, &w)| (h as f64 / got.max(1) as f64 - w).abs())
        .sum::<f64>()
        / 2.0;
    run.extra.insert(
        "expected_rate".into(),
        extraction_success_probability(params.r(), lambda),
    );
    run.extra.insert("error_tv".into(), tv);
    run.secrets.push(s);
    run.finish()
}

// ---- attacks -----------------------------------------------------------

pub fn attack_sieve(
    args: &ParamArgs,
    k: usize,
    coord: Option<usize>,
    pool_exponent: Option<f64>,
    runs: u64,
    seed: u64,
    output: &OutputArgs,
) -> CliResult<()> {
    let params = args.params()?;
    let n = params.n();
    let coord = coord.unwrap_or(n - 1);
    if coord >= n {
        return Err(CliError::invalid(
            "--coord",
            format!("must be below n = {n}"),
        ));
    }
    if k == 0 {
        return Err(CliError::invalid("--k", "must be at least 1"));
    }
    let ell = pool_exponent.unwrap_or_else(|| kuperberg_pool_exponent(n, params.q(), k));
    if !(ell > 0.0) || (params.q() as f64).powf(ell) > 1e7 {
        return Err(CliError::invalid(
            "--pool-exponent",
            format!("pool q^{ell} out of range"),
        ));
    }
    let mut run = Run::new("attack-sieve", &params, output)
        .config("k", json!(k))
        .config("coord", json!(coord))
        .config("pool_exponent", json!(ell))
        .config("runs", json!(runs))
        .config("seed", json!(seed));
    let mut ratios = Vec::new();
    for i in 0..runs {
        let ts = derive_seed(seed, i);
        let mut ch = Challenger::new(params.clone(), derive_seed(ts, 0));
        let (rep, us) =
            run.timed(|| kuperberg_recover(&mut ch, coord, k, ell, &mut trial_rng(ts, 1)));
        match rep {
            Ok(rep) => {
                ratios.extend(rep.survivors.iter().map(|&s| s as f64 / rep.pool as f64));
                run.push(ts, ok_word(rep.correct), rep.samples, us);
            }
            Err(e @ edcp::Error::PoolExhausted { .. }) => {
                run.push(ts, format!("fail: {e}"), ch.issued(), us)
            }
            Err(e) => return Err(e.into()),
        }
        run.secrets.push(ch.reveal_secret().clone());
    }
    if !ratios.is_empty() {
        run.extra.insert(
            "mean_survival_ratio".into(),
            ratios.iter().sum::<f64>() / ratios.len() as f64,
        );
    }
    run.extra
        .insert("pool".into(), (params.q() as f64).powf(ell).ceil());
    run.finish()
}

pub fn attack_pgm(
    args: &ParamArgs,
    t: usize,
    runs: u64,
    seed: u64,
    output: &OutputArgs,
) -> CliResult<()> {
    let params = args.params()?;
    if params.n() != 1 {
        return Err(CliError::invalid(
            "--n",
            "attack-pgm needs single-coordinate labels (n = 1)",
        ));
    }
    if t == 0 || t > PGM_MAX_STATES {
        return Err(CliError::invalid(
            "--t",
            format!("must lie in [1, {PGM_MAX_STATES}]"),
        ));
    }
    let mut run = Run::new("attack-pgm", &params, output)
        .config("t", json!(t))
        .config("runs", json!(runs))
        .config("seed", json!(seed));
    let mut exact = 0.0;
    for i in 0..runs {
        let ts = derive_seed(seed, i);
        let mut ch = Challenger::new(params.clone(), derive_seed(ts, 0));
        let mut rng = trial_rng(ts, 1);
        let (res, us) = run.timed(|| -> edcp::Result<(u64, Vec<u64>)> {
            let states = (0..t)
                .map(|_| edcp_to_phase(&mut ch, &mut rng))
                .collect::<edcp::Result<Vec<_>>>()?;
            let labels = states.iter().map(|s| s.label().get(0)).collect();
            Ok((pgm_recover(&states, 0, &mut rng)?, labels))
        });
        let (guess, labels) = res?;
        exact += pgm_success_probability(&labels, params.q());
        run.push(
            ts,
            ok_word(guess == ch.reveal_secret().get(0)),
            ch.issued(),
            us,
        );
        run.secrets.push(ch.reveal_secret().clone());
    }
    run.extra
        .insert("exact_success_mean".into(), exact / runs.max(1) as f64);
    run.finish()
}

pub fn attack_fourier(
    args: &ParamArgs,
    runs: u64,
    seed: u64,
    output: &OutputArgs,
) -> CliResult<()> {
    let params = args.params()?;
    if params.r() != params.q() {
        return Err(CliError::invalid("--r", "attack-fourier needs r = q"));
    }
    let mut run = Run::new("attack-fourier", &params, output)
        .config("runs", json!(runs))
        .config("seed", json!(seed));
    for i in 0..runs {
        let ts = derive_seed(seed, i);
        let mut ch = Challenger::new(params.clone(), derive_seed(ts, 0));
        let (rep, us) = run.timed(|| fourier_attack_r_eq_q(&mut ch, &mut trial_rng(ts, 1)));
        match rep {
            Ok(rep) => {
                let ok = ch.is_secret(&rep.secret);
                if runs <= 10 {
                    println!(
                        "run {i}: recovered {} in {} samples, matches challenger: {}",
                        rep.secret,
                        rep.samples,
                        ok_word(ok)
                    );
                }
                run.push(ts, ok_word(ok), rep.samples, us);
            }
            Err(e @ edcp::Error::Underdetermined) => {
                run.push(ts, format!("fail: {e}"), ch.issued(), us)
            }
            Err(e) => return Err(e.into()),
        }
        run.secrets.push(ch.reveal_secret().clone());
    }
    run.finish()
}

// ---- information theory -----------------------------------------------

pub fn holevo(args: &ParamArgs, m: u32, success_p: f64, output: &OutputArgs) -> CliResult<()> {
    let params = args.params()?;
    if m == 0 {
        return Err(CliError::invalid("--m", "must be at least 1"));
    }
    let fano = fano_min_samples(&params, success_p)
        .map_err(|e| CliError::invalid("--success-p", e.to_string()))?;
    let mut run = Run::new("holevo", &params, output)
        .config("m", json!(m))
        .config("success_p", json!(success_p));
    run.extra.insert(
        "chi_closed_form".into(),
        edcp::infotheory::chi_closed_form(&params, m),
    );
    match holevo_chi(&params, m) {
        Ok(rep) => {
            run.extra.insert("chi".into(), rep.chi_numeric);
        }
        Err(edcp::Error::DimensionCap { dim, cap }) => {
            println!("chi numeric skipped: dimension {dim} above {cap}");
        }
        Err(e) => return Err(e.into()),
    }
    run.extra.insert("fano_min_samples".into(), fano as f64);
    run.finish()
}

// ---- self test ---------------------------------------------------------

pub fn selftest(scale: f64, seed: u64, fault: Option<FaultArg>) -> CliResult<()> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(CliError::invalid("--scale", "must lie in (0, 1]"));
    }
    let fault = match fault {
        Some(FaultArg::QftSign) => Fault::QftSign,
        None => Fault::None,
    };
    let cfg = CheckConfig { seed, scale, fault };
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        let res = run_check(id, &cfg);
        println!("{res}");
        if !res.passed {
            failed.push(res.name);
        }
    }
    println!(
        "selftest: {}/{} checks passed",
        CRITERIA as usize - failed.len(),
        CRITERIA
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}
