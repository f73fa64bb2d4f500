//! Binary checkpoints that resume training bit-for-bit.
//!
//! A checkpoint captures everything a [`Trainer`] owns, including the
//! position of its shuffle stream, so a run restored mid-flight produces
//! the same numbers as one that never stopped.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backbone::{BackboneParams, EntryMask, FieldSchema, ModelConfig, Trainer};
use crate::error::{Error, Result};
use crate::gates::GateSet;
use crate::scalar::Real;

pub const CHECKPOINT_VERSION: u32 = 1;

/// A ChaCha generator frozen mid-stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: [u8; 32],
    pub word_pos: u128,
    pub stream: u64,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        RngState {
            seed: rng.get_seed(),
            word_pos: rng.get_word_pos(),
            stream: rng.get_stream(),
        }
    }

    pub fn restore(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos);
        rng
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint<S> {
    pub version: u32,
    /// Schema fingerprint, duplicated from `schema` so artifact mismatches
    /// surface before deserialization consumers touch the parameters.
    pub fingerprint: String,
    pub schema: FieldSchema,
    pub config: ModelConfig,
    pub params: BackboneParams<S>,
    pub adam: crate::adam::AdamState<S>,
    pub gates: Option<GateSet<S>>,
    pub mask: Option<EntryMask>,
    pub rng: RngState,
    pub seed: u64,
    pub step: u64,
}

impl<S: Real> Checkpoint<S> {
    pub fn capture(trainer: &Trainer<S>) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            fingerprint: trainer.schema.fingerprint(),
            schema: trainer.schema.clone(),
            config: trainer.config.clone(),
            params: trainer.params.clone(),
            adam: trainer.adam.clone(),
            gates: trainer.gates.clone(),
            mask: trainer.mask.clone(),
            rng: RngState::capture(&trainer.rng),
            seed: trainer.seed,
            step: trainer.step,
        }
    }

    /// Rebuild the trainer exactly as captured.
    pub fn restore(self) -> Result<Trainer<S>> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::State(format!(
                "checkpoint version {} (this build reads {})",
                self.version, CHECKPOINT_VERSION
            )));
        }
        if self.fingerprint != self.schema.fingerprint() {
            return Err(Error::State(format!(
                "checkpoint fingerprint {} does not match its schema ({})",
                self.fingerprint,
                self.schema.fingerprint()
            )));
        }
        Ok(Trainer {
            schema: self.schema,
            config: self.config,
            params: self.params,
            adam: self.adam,
            gates: self.gates,
            mask: self.mask,
            seed: self.seed,
            step: self.step,
            rng: self.rng.restore(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes =
            bincode::serialize(self).map_err(|e| Error::Serialize(e.to_string()))?;
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        bincode::deserialize(&bytes).map_err(|e| Error::Serialize(e.to_string()))
    }
}
