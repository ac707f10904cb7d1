//! Versioned policy checkpoint: parameters, optimizer moments, baseline, and
//! the epoch counter, serialized as JSON. Field order follows the struct
//! declaration below; floating-point values round-trip bit-exactly through
//! the shortest-representation formatter.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{AdamState, BaselineState, PolicyParams};
use crate::scalar::Real;
use crate::trainer::TrainState;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<F> {
    pub version: u32,
    /// Scalar type the checkpoint was written with (`f32` or `f64`).
    pub scalar: String,
    pub epochs_done: usize,
    pub params: PolicyParams<F>,
    pub adam: AdamState<F>,
    pub baseline: BaselineState<F>,
    /// Path of the run manifest that produced this checkpoint, if any.
    #[serde(default)]
    pub manifest: Option<String>,
}

fn scalar_name<F: Real>() -> &'static str {
    if std::mem::size_of::<F>() == 4 {
        "f32"
    } else {
        "f64"
    }
}

impl<F: Real> Checkpoint<F> {
    pub fn from_state(state: &TrainState<F>, manifest: Option<String>) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            scalar: scalar_name::<F>().to_string(),
            epochs_done: state.epochs_done,
            params: state.params.clone(),
            adam: state.adam.clone(),
            baseline: state.baseline,
            manifest,
        }
    }

    pub fn into_state(self) -> TrainState<F> {
        TrainState {
            params: self.params,
            adam: self.adam,
            baseline: self.baseline,
            epochs_done: self.epochs_done,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::internal(format!("checkpoint encode: {e}")))
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        let checkpoint: Checkpoint<F> = serde_json::from_str(raw)
            .map_err(|e| Error::validation(format!("checkpoint decode: {e}")))?;
        if checkpoint.version != CHECKPOINT_VERSION {
            return Err(Error::validation(format!(
                "unsupported checkpoint version {}, expected {CHECKPOINT_VERSION}",
                checkpoint.version
            )));
        }
        if checkpoint.scalar != scalar_name::<F>() {
            return Err(Error::validation(format!(
                "checkpoint scalar {} does not match requested {}",
                checkpoint.scalar,
                scalar_name::<F>()
            )));
        }
        Ok(checkpoint)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let raw = std::fs::read_to_string(path.as_ref())?;
        Self::from_json(&raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::TrainConfig;

    #[test]
    fn round_trips_bit_exactly() {
        let config = TrainConfig::default();
        let state = TrainState::<f64>::init(&config);
        let checkpoint = Checkpoint::from_state(&state, Some("run.manifest.json".into()));
        let json = checkpoint.to_json().unwrap();
        let back = Checkpoint::<f64>::from_json(&json).unwrap();
        assert_eq!(checkpoint, back);
        let state_back = back.into_state();
        assert_eq!(state, state_back);
    }

    #[test]
    fn rejects_wrong_version_and_scalar() {
        let config = TrainConfig::default();
        let state = TrainState::<f64>::init(&config);
        let mut checkpoint = Checkpoint::from_state(&state, None);
        checkpoint.version = 99;
        let json = serde_json::to_string(&checkpoint).unwrap();
        assert!(Checkpoint::<f64>::from_json(&json).is_err());
        checkpoint.version = CHECKPOINT_VERSION;
        let json = serde_json::to_string(&checkpoint).unwrap();
        assert!(Checkpoint::<f32>::from_json(&json).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.ckpt.json");
        let state = TrainState::<f32>::init(&TrainConfig::default());
        Checkpoint::from_state(&state, None).save(&path).unwrap();
        let loaded = Checkpoint::<f32>::load(&path).unwrap();
        assert_eq!(loaded.into_state(), state);
    }
}
