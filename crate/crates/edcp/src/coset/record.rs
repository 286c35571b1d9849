use serde::{Deserialize, Serialize};

use super::{CosetState, EdcpParams, Phase, Progression};
use crate::error::{Error, Result};
use crate::modmath::ZqVector;

/// Which fields a serialized record carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// Everything, including secret-derived fields. Simulation-only.
    Full,
    /// Only what the holder of the quantum state could know.
    AdversaryView,
}

/// Classical description of a [`CosetState`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetRecord {
    pub params: EdcpParams,
    pub width: u64,
    pub support: Progression,
    pub phase_modulus: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<ZqVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effective_secret: Option<ZqVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_slope: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub issuer: Option<u64>,
}

impl CosetState {
    pub fn to_record(&self, role: Role) -> CosetRecord {
        let full = role == Role::Full;
        CosetRecord {
            params: self.params.clone(),
            width: self.width,
            support: self.support,
            phase_modulus: self.phase.modulus,
            offset: full.then(|| self.offset.clone()),
            effective_secret: full.then(|| self.secret.clone()),
            phase_slope: full.then_some(self.phase.slope),
            issuer: full.then_some(self.issuer),
        }
    }

    /// Rebuild a state from a full record. Simulation-only.
    pub fn from_record(rec: CosetRecord) -> Result<Self> {
        let (Some(offset), Some(secret), Some(slope), Some(issuer)) = (
            rec.offset,
            rec.effective_secret,
            rec.phase_slope,
            rec.issuer,
        ) else {
            return Err(Error::InvalidOperation(
                "an adversary-view record cannot be turned back into a state".into(),
            ));
        };
        let (q, n) = (rec.params.q(), rec.params.n());
        let s = rec.support;
        let bad = s.count == 0
            || s.stride == 0
            || s.last() >= rec.width
            || rec.phase_modulus == 0
            || slope >= rec.phase_modulus
            || offset.modulus() != q
            || offset.dim() != n
            || secret.modulus() != q
            || secret.dim() != n;
        if bad {
            return Err(Error::InvalidOperation("inconsistent coset record".into()));
        }
        Ok(CosetState {
            params: rec.params,
            width: rec.width,
            offset,
            secret,
            support: s,
            phase: Phase {
                modulus: rec.phase_modulus,
                slope,
            },
            issuer,
        }
        .canonical())
    }
}
