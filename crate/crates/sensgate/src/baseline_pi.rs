//! Classical permutation importance as the post-hoc comparator.
//!
//! Each field's importance is the AUC lost when that column is permuted
//! across the whole split. Every full-split model evaluation is counted so
//! the cost scaling against a single gated training run is measurable in
//! passes rather than wall time.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::backbone::{GateMode, Trainer};
use crate::data::{Dataset, Split};
use crate::error::{Error, Result};
use crate::metrics::{auc, ranking_desc};
use crate::scalar::Real;
use crate::seeds;
use crate::shuffle::make_permutations;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiReport {
    /// Mean AUC drop per model field, over all repeats.
    pub importance: Vec<f64>,
    pub base_auc: f64,
    /// Full-split evaluations performed: `(F + 1) * repeats`.
    pub n_eval_passes: usize,
    pub wall_time_seconds: f64,
}

/// Permutation importance of every field of a plain trained model.
///
/// Each repeat runs one clean pass and one pass per field with that field's
/// column permuted over the whole split (classical definition, not the
/// batch-wise shuffle used during gate training).
pub fn permutation_importance<S: Real>(
    trainer: &Trainer<S>,
    ds: &Dataset,
    split: Split,
    repeats: usize,
    seed: u64,
) -> Result<PiReport> {
    if trainer.gates.is_some() {
        return Err(Error::Contract(
            "permutation importance expects a model trained without gates".into(),
        ));
    }
    if repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    let started = Instant::now();
    let (x, y) = ds.gather(ds.split_indices(split)?);
    let rows = y.len();
    let cols = ds.n_fields();
    let f = trainer.schema.n_fields();

    let mut importance = vec![0.0f64; f];
    let mut base_auc = 0.0;
    let mut passes = 0usize;
    for repeat in 0..repeats {
        let mut rng = seeds::rng(seed, seeds::PERM_IMPORTANCE, repeat as u64);
        let probs = trainer.predict(&x, rows, cols, GateMode::Off, None)?;
        passes += 1;
        base_auc = auc(&probs, &y)?;
        for (k, spec) in trainer.schema.fields.iter().enumerate() {
            let perm = make_permutations(&mut rng, 1, rows).pop().unwrap();
            let mut shuffled = x.clone();
            for r in 0..rows {
                shuffled[r * cols + spec.source_col] =
                    x[perm[r] as usize * cols + spec.source_col];
            }
            let probs = trainer.predict(&shuffled, rows, cols, GateMode::Off, None)?;
            passes += 1;
            importance[k] += (base_auc - auc(&probs, &y)?) / repeats as f64;
        }
    }

    Ok(PiReport {
        importance,
        base_auc,
        n_eval_passes: passes,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Kendall rank correlation between the permutation-importance ordering and
/// a gate-value ordering over the same fields.
pub fn rank_agreement(pi: &PiReport, gate_values: &[f64]) -> Result<f64> {
    if pi.importance.len() != gate_values.len() {
        return Err(Error::Domain(format!(
            "{} importance values against {} gates",
            pi.importance.len(),
            gate_values.len()
        )));
    }
    crate::metrics::kendall_tau(&ranking_desc(&pi.importance), &ranking_desc(gate_values))
}
