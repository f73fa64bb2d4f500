//! Feature, dimension, and embedding-entry selection for tabular click
//! models. Learnable gates mix each unit's clean signal with a batch-shuffled
//! counterpart; a sparsity penalty drives unhelpful gates to zero, and the
//! surviving units are physically pruned and retrained.
//!
//! Numeric code is generic over the scalar type through [`scalar::Real`]:
//! training runs at `f32`, gradient checks at `f64`. The aliases below pin
//! the common concrete choices.

pub mod adam;
pub mod backbone;
pub mod baseline_pi;
pub mod checkpoint;
pub mod data;
pub mod diffcore;
pub mod error;
pub mod gates;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod seeds;
pub mod shuffle;

pub use error::{Error, Result};

/// Single-precision graph tape, the training default.
pub type TapeF32 = diffcore::Tape<f32>;
/// Double-precision tape for finite-difference checks.
pub type TapeF64 = diffcore::Tape<f64>;
/// Single-precision trainer, the training default.
pub type TrainerF32 = backbone::Trainer<f32>;
/// Double-precision trainer for gradient checking.
pub type TrainerF64 = backbone::Trainer<f64>;
/// Single-precision gate set.
pub type GateSetF32 = gates::GateSet<f32>;
/// Double-precision gate set.
pub type GateSetF64 = gates::GateSet<f64>;
/// Checkpoint of a single-precision trainer.
pub type CheckpointF32 = checkpoint::Checkpoint<f32>;
