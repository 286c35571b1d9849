//! On-disk records. A quantum state cannot be persisted honestly, so files
//! hold the symbolic description of a coset state. The full role keeps every
//! field and is for simulation only; the adversary view drops the secret and
//! everything derived from it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use edcp::coset::{CosetRecord, Role};
use edcp::{EdcpParams, ZqVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const SIMULATION_ONLY: &str = "SIMULATION-ONLY";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub n: usize,
    pub q: u64,
    pub r: u64,
    pub p: u64,
}

impl Header {
    pub fn of(params: &EdcpParams) -> Self {
        Header {
            n: params.n(),
            q: params.q(),
            r: params.r(),
            p: params.p(),
        }
    }

    pub fn params(&self) -> CliResult<EdcpParams> {
        EdcpParams::new(self.n, self.q, self.r, self.p)
            .map_err(|e| CliError::invalid("header", e.to_string()))
    }
}

fn label(role: Role) -> Option<String> {
    (role == Role::Full).then(|| SIMULATION_ONLY.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyPairFile {
    pub schema_version: u32,
    pub kind: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub header: Header,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<ZqVector>,
    /// The public key state; gone once an encryption has used it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_key: Option<CosetRecord>,
    pub consumed: bool,
}

impl KeyPairFile {
    pub fn new(
        params: &EdcpParams,
        role: Role,
        secret: &ZqVector,
        public: Option<CosetRecord>,
    ) -> Self {
        KeyPairFile {
            schema_version: SCHEMA_VERSION,
            kind: "keypair".into(),
            role,
            label: label(role),
            header: Header::of(params),
            secret: (role == Role::Full).then(|| secret.clone()),
            consumed: public.is_none(),
            public_key: public,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiphertextFile {
    pub schema_version: u32,
    pub kind: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub header: Header,
    pub state: CosetRecord,
}

impl CiphertextFile {
    pub fn new(params: &EdcpParams, role: Role, state: CosetRecord) -> Self {
        CiphertextFile {
            schema_version: SCHEMA_VERSION,
            kind: "ciphertext".into(),
            role,
            label: label(role),
            header: Header::of(params),
            state,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub seed: u64,
    pub outcome: String,
    pub samples_used: u64,
    pub elapsed_us: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub kind: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub command: String,
    pub header: Header,
    pub config: BTreeMap<String, serde_json::Value>,
    pub trials: Vec<TrialRow>,
    pub aggregate: BTreeMap<String, f64>,
    /// Per-trial secrets; full role only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secrets: Option<Vec<ZqVector>>,
    pub elapsed_us: u64,
}

/// success_rate and mean_samples recomputed from the trial rows.
pub fn summarize(trials: &[TrialRow]) -> BTreeMap<String, f64> {
    let n = trials.len().max(1) as f64;
    let ok = trials.iter().filter(|t| t.outcome == "ok").count() as f64;
    let samples: u64 = trials.iter().map(|t| t.samples_used).sum();
    BTreeMap::from([
        ("success_rate".to_string(), ok / n),
        ("mean_samples".to_string(), samples as f64 / n),
    ])
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read a record, checking the schema version and kind before anything else.
pub fn read_json<T: DeserializeOwned>(path: &Path, kind: &str) -> CliResult<T> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Schema {
        path: shown.clone(),
        msg: e.to_string(),
    })?;
    let version = raw.get("schema_version").and_then(|v| v.as_u64());
    if version != Some(SCHEMA_VERSION as u64) {
        return Err(CliError::Schema {
            path: shown,
            msg: format!("schema_version {version:?}, expected {SCHEMA_VERSION}"),
        });
    }
    let found = raw.get("kind").and_then(|v| v.as_str()).unwrap_or("");
    if found != kind {
        return Err(CliError::Schema {
            path: shown,
            msg: format!("kind {found:?}, expected {kind:?}"),
        });
    }
    serde_json::from_value(raw).map_err(|e| CliError::Schema {
        path: shown,
        msg: e.to_string(),
    })
}

pub fn write_csv(path: &Path, rows: &[TrialRow]) -> CliResult<()> {
    let io = |e: csv::Error| CliError::Failed(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
