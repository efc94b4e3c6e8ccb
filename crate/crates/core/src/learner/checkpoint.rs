//! Versioned checkpoint files.
//!
//! Layout: 8-byte magic, little-endian `u32` version, little-endian `u64`
//! header length, a JSON header, then the policy and value parameters as
//! little-endian `f64`.

use super::nn::GoalNet;
use super::obs::ObsConfig;
use super::ppo::{LearnerConfig, LearnerError, PpoModel};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"TVCKPT\0\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("bad header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("parameter block has {got} values, header declares {expected}")]
    Truncated { got: usize, expected: usize },
    #[error(transparent)]
    Model(#[from] LearnerError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub learner: LearnerConfig,
    pub obs: ObsConfig,
    pub policy: GoalNet,
    pub value: GoalNet,
    pub kl_coeff: f64,
    pub seed: u64,
    pub iteration: u64,
    /// Curriculum level when the checkpoint was written.
    pub level: u32,
}

/// A model together with the observation settings it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: PpoModel,
    pub obs: ObsConfig,
    pub iteration: u64,
    pub level: u32,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>, CheckpointError> {
        let m = &self.model;
        let header = CheckpointHeader {
            learner: m.config.clone(),
            obs: self.obs.clone(),
            policy: m.policy.clone(),
            value: m.value.clone(),
            kl_coeff: m.kl_coeff,
            seed: m.seed,
            iteration: self.iteration,
            level: self.level,
        };
        let json = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(20 + json.len() + 8 * (m.policy_params.len() + m.value_params.len()));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for v in m.policy_params.iter().chain(&m.value_params) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < 20 || &bytes[..8] != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(CheckpointError::Version(version));
        }
        let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
        let body = bytes.get(20..).unwrap_or_default();
        if body.len() < hlen {
            return Err(CheckpointError::Truncated { got: 0, expected: hlen });
        }
        let header: CheckpointHeader = serde_json::from_slice(&body[..hlen])?;
        let np = header.policy.param_count();
        let nv = header.value.param_count();
        let raw = &body[hlen..];
        if raw.len() != 8 * (np + nv) {
            return Err(CheckpointError::Truncated {
                got: raw.len() / 8,
                expected: np + nv,
            });
        }
        let mut vals = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        let policy_params: Vec<f64> = vals.by_ref().take(np).collect();
        let value_params: Vec<f64> = vals.collect();
        let model = PpoModel::from_parts(
            header.learner,
            header.policy,
            policy_params,
            header.value,
            value_params,
            header.kl_coeff,
            header.seed,
        )?;
        Ok(Checkpoint {
            model,
            obs: header.obs,
            iteration: header.iteration,
            level: header.level,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}
