//! `edcp`: experiment runner for the EDCP simulation laboratory.

mod commands;
mod error;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edcp::EdcpParams;

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "edcp",
    version,
    about = "Extrapolated dihedral coset problem laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub r: u64,
    /// Distinguished prime of q; defaults to the smallest.
    #[arg(long)]
    pub p: Option<u64>,
}

impl ParamArgs {
    pub fn params(&self) -> CliResult<EdcpParams> {
        let built = match self.p {
            Some(p) => EdcpParams::new(self.n, self.q, self.r, p),
            None => EdcpParams::with_smallest_prime(self.n, self.q, self.r),
        };
        built.map_err(|e| CliError::invalid("--n/--q/--r/--p", e.to_string()))
    }

    pub fn qpke_params(&self) -> CliResult<EdcpParams> {
        let p = self.params()?;
        p.check_qpke()
            .map_err(|e| CliError::invalid("--q/--r/--p", e.to_string()))?;
        Ok(p)
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the run record (JSON) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-trial rows (CSV) here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RoleArg::AdversaryView)]
    pub role: RoleArg,
    /// Record wall-clock times; without it every elapsed_us is 0 and records are byte-reproducible.
    #[arg(long)]
    pub timing: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoleArg {
    Full,
    AdversaryView,
}

impl From<RoleArg> for edcp::coset::Role {
    fn from(r: RoleArg) -> Self {
        match r {
            RoleArg::Full => edcp::coset::Role::Full,
            RoleArg::AdversaryView => edcp::coset::Role::AdversaryView,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleArg {
    Perfect,
    Statistical,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultArg {
    QftSign,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a key pair and write it to a file.
    Keygen {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = RoleArg::Full)]
        role: RoleArg,
    },
    /// Encrypt one bit with the public key in a key file; the key is consumed.
    Encrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        bit: u8,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = RoleArg::Full)]
        role: RoleArg,
    },
    /// Decrypt a ciphertext file with the secret from a key file.
    Decrypt {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[arg(long)]
        seed: u64,
    },
    /// Fresh keygen, encrypt and decrypt per trial.
    Roundtrip {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Encrypt only this bit; both by default.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        bit: Option<u8>,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Search-to-decision through the hybrid levels.
    ReduceHybrid {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Search-to-decision through phase candidates.
    ReducePhase {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Turn coset states into shifted LWE samples.
    ExtractLwe {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sieve phase states down to one coordinate, then finish with the PGM.
    AttackSieve {
        #[command(flatten)]
        params: ParamArgs,
        /// Coordinates zeroed per stage.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Coordinate to recover; the last by default.
        #[arg(long)]
        coord: Option<usize>,
        /// Pool size is q^ℓ; the analysis value k + 3n/(k log₂ q) by default.
        #[arg(long)]
        pool_exponent: Option<f64>,
        #[arg(long, default_value_t = 10)]
        runs: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// PGM on t fresh phase states (n = 1).
    AttackPgm {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 10)]
        runs: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Linear equations from the r = q Fourier transform.
    AttackFourier {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        runs: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Holevo quantity of the m-sample ensemble and the Fano sample bound.
    Holevo {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Target success probability for the Fano bound.
        #[arg(long, default_value_t = 0.99)]
        success_p: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every acceptance check.
    Selftest {
        /// Multiplier on trial counts.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Corrupt the dense engine to confirm the checks notice.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 10)]
    pub instances: u64,
    #[arg(long, value_enum, default_value_t = OracleArg::Perfect)]
    pub oracle: OracleArg,
    /// Confidence exponent of the statistical oracle.
    #[arg(long, default_value_t = 8)]
    pub confidence: u32,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn dispatch(cmd: Command) -> CliResult<()> {
    use commands::*;
    match cmd {
        Command::Keygen {
            params,
            seed,
            out,
            role,
        } => keygen(&params, seed, &out, role),
        Command::Encrypt {
            key,
            bit,
            seed,
            out,
            role,
        } => encrypt(&key, bit, seed, &out, role),
        Command::Decrypt { key, ct, seed } => decrypt(&key, &ct, seed),
        Command::Roundtrip {
            params,
            trials,
            bit,
            seed,
            output,
        } => roundtrip(&params, trials, bit, seed, &output),
        Command::ReduceHybrid { params, search } => reduce(&params, &search, Reduction::Hybrid),
        Command::ReducePhase { params, search } => reduce(&params, &search, Reduction::Phase),
        Command::ExtractLwe {
            params,
            lambda,
            trials,
            seed,
            output,
        } => extract_lwe(&params, lambda, trials, seed, &output),
        Command::AttackSieve {
            params,
            k,
            coord,
            pool_exponent,
            runs,
            seed,
            output,
        } => attack_sieve(&params, k, coord, pool_exponent, runs, seed, &output),
        Command::AttackPgm {
            params,
            t,
            runs,
            seed,
            output,
        } => attack_pgm(&params, t, runs, seed, &output),
        Command::AttackFourier {
            params,
            runs,
            seed,
            output,
        } => attack_fourier(&params, runs, seed, &output),
        Command::Holevo {
            params,
            m,
            success_p,
            output,
        } => holevo(&params, m, success_p, &output),
        Command::Selftest {
            scale,
            seed,
            inject_fault,
        } => selftest(scale, seed, inject_fault),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
