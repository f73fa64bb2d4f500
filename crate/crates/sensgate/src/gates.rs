//! Learnable sensitivity gates.
//!
//! Each selectable unit (a field, an embedding column group, or a single
//! embedding entry) owns a parameter `p` mapped through a temperature-scaled
//! sigmoid to a gate `g = sigmoid(temperature * p)` in (0, 1). The forward
//! pass mixes the clean signal with its batch-shuffled counterpart,
//! `g * z + (1 - g) * stop_grad(z_shuffled)`, and an L1 penalty on the mean
//! gate pushes every gate toward zero. Units whose removal would raise the
//! task loss by more than the penalty can afford to resist; the rest
//! collapse. Training polarizes the population toward {0, 1} and the final
//! values double as an importance ranking.

use serde::{Deserialize, Serialize};

use crate::diffcore::{Tape, TensorId};
use crate::error::{Error, Result};
use crate::scalar::{logit, real, sigmoid, Real};

/// Selection resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// One gate per feature field.
    Field,
    /// One gate per group of `chunk` adjacent embedding columns.
    Dimension { chunk: usize },
    /// One gate per embedding-table entry, looked up alongside the embedding.
    Entry,
}

impl Granularity {
    pub fn label(&self) -> &'static str {
        match self {
            Granularity::Field => "field",
            Granularity::Dimension { .. } => "dim",
            Granularity::Entry => "entry",
        }
    }
}

/// Raw gate parameters, pre-sigmoid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GateParams<S> {
    /// Field and dimension granularity: one flat vector, one value per unit.
    PerUnit(Vec<S>),
    /// Entry granularity: one `vocab x dim` row-major table per field.
    PerEntry(Vec<Vec<S>>),
}

/// Gate population for one search run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateSet<S> {
    pub granularity: Granularity,
    pub params: GateParams<S>,
    pub temperature: S,
    pub sparsity_weight: S,
    /// Steps at the start of training during which gate parameters receive
    /// zero gradient while the backbone settles.
    pub warmup_steps: usize,
}

/// Gate value every unit starts at.
pub const INITIAL_GATE: f64 = 0.99;

impl<S: Real> GateSet<S> {
    fn initial_param(temperature: S) -> S {
        logit(real::<S>(INITIAL_GATE)) / temperature
    }

    fn validate(temperature: S, sparsity_weight: S) -> Result<()> {
        if temperature <= S::zero() {
            return Err(Error::Config("gate temperature must be positive".into()));
        }
        if sparsity_weight < S::zero() {
            return Err(Error::Config("sparsity weight must be non-negative".into()));
        }
        Ok(())
    }

    /// One gate per field.
    pub fn field(
        n_fields: usize,
        temperature: S,
        sparsity_weight: S,
        warmup_steps: usize,
    ) -> Result<Self> {
        Self::validate(temperature, sparsity_weight)?;
        if n_fields == 0 {
            return Err(Error::Config("field gates need at least one field".into()));
        }
        Ok(GateSet {
            granularity: Granularity::Field,
            params: GateParams::PerUnit(vec![Self::initial_param(temperature); n_fields]),
            temperature,
            sparsity_weight,
            warmup_steps,
        })
    }

    /// One gate per `chunk`-column group of the concatenated embedding.
    pub fn dimension(
        field_dims: &[usize],
        chunk: usize,
        temperature: S,
        sparsity_weight: S,
        warmup_steps: usize,
    ) -> Result<Self> {
        Self::validate(temperature, sparsity_weight)?;
        if chunk == 0 {
            return Err(Error::Config("chunk must be positive".into()));
        }
        let mut units = 0usize;
        for &d in field_dims {
            if d % chunk != 0 {
                return Err(Error::Config(format!(
                    "chunk {} does not divide embedding width {}",
                    chunk, d
                )));
            }
            units += d / chunk;
        }
        if units == 0 {
            return Err(Error::Config("dimension gates need at least one unit".into()));
        }
        Ok(GateSet {
            granularity: Granularity::Dimension { chunk },
            params: GateParams::PerUnit(vec![Self::initial_param(temperature); units]),
            temperature,
            sparsity_weight,
            warmup_steps,
        })
    }

    /// One gate per entry of each `(vocab, dim)` embedding table.
    pub fn entry(
        tables: &[(usize, usize)],
        temperature: S,
        sparsity_weight: S,
        warmup_steps: usize,
    ) -> Result<Self> {
        Self::validate(temperature, sparsity_weight)?;
        if tables.is_empty() {
            return Err(Error::Config("entry gates need at least one table".into()));
        }
        let params = tables
            .iter()
            .map(|&(v, d)| vec![Self::initial_param(temperature); v * d])
            .collect();
        Ok(GateSet {
            granularity: Granularity::Entry,
            params: GateParams::PerEntry(params),
            temperature,
            sparsity_weight,
            warmup_steps,
        })
    }

    /// Number of gates in the population (`|S|` in the penalty normalizer).
    pub fn total_gates(&self) -> usize {
        match &self.params {
            GateParams::PerUnit(v) => v.len(),
            GateParams::PerEntry(tables) => tables.iter().map(|t| t.len()).sum(),
        }
    }

    /// Current gate values, flattened over the whole population.
    pub fn values(&self) -> Vec<S> {
        let map = |p: &S| sigmoid(self.temperature * *p);
        match &self.params {
            GateParams::PerUnit(v) => v.iter().map(map).collect(),
            GateParams::PerEntry(tables) => tables.iter().flatten().map(map).collect(),
        }
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values().iter().map(|v| v.to_f64().unwrap()).collect()
    }

    /// Summary statistics of the current gate values.
    pub fn stats(&self) -> GateStats {
        GateStats::from_values(&self.values_f64())
    }

    // ── Graph construction ─────────────────────────────────────────────

    /// Gates from an on-tape parameter tensor: `sigmoid(temperature * p)`.
    pub fn gate_nodes(&self, tape: &mut Tape<S>, params: TensorId) -> TensorId {
        let scaled = tape.affine(params, self.temperature, S::zero());
        tape.sigmoid_op(scaled)
    }

    /// Entry gates for a batch: rows of the per-field gate table selected by
    /// the same indices as the embedding lookup, then squashed.
    pub fn entry_gate_lookup(
        &self,
        tape: &mut Tape<S>,
        param_table: TensorId,
        indices: &[u32],
    ) -> Result<TensorId> {
        let rows = tape.gather_rows(param_table, indices)?;
        let scaled = tape.affine(rows, self.temperature, S::zero());
        Ok(tape.sigmoid_op(scaled))
    }

    /// The gated mix `g * clean + (1 - g) * stop_grad(shuffled)`.
    ///
    /// The shuffled branch is frozen: its values flow forward, but no
    /// gradient reaches the shuffled tensor or anything upstream of it.
    pub fn apply(
        &self,
        tape: &mut Tape<S>,
        clean: TensorId,
        shuffled: TensorId,
        g: TensorId,
    ) -> Result<TensorId> {
        if tape.shape(clean) != tape.shape(shuffled) {
            return Err(Error::Dimension(format!(
                "apply: clean {:?} against shuffled {:?}",
                tape.shape(clean),
                tape.shape(shuffled)
            )));
        }
        let kept = tape.broadcast_mul(clean, g)?;
        let frozen = tape.stop_grad(shuffled);
        let inverse = tape.one_minus(g);
        let noise = tape.broadcast_mul(frozen, inverse)?;
        tape.add(kept, noise)
    }

    /// L1 sparsity penalty `sparsity_weight * mean(g)` as a graph node, for
    /// granularities whose full gate vector is materialized on the tape.
    pub fn sparsity_penalty(&self, tape: &mut Tape<S>, gates: TensorId) -> Result<TensorId> {
        if tape.numel(gates) != self.total_gates() {
            return Err(Error::Contract(format!(
                "sparsity_penalty over {} gates, population has {}",
                tape.numel(gates),
                self.total_gates()
            )));
        }
        let mean = tape.mean_all(gates)?;
        Ok(tape.affine(mean, self.sparsity_weight, S::zero()))
    }

    /// Penalty value computed off-tape, for logging at entry granularity
    /// where materializing the full mean every step is wasteful.
    pub fn penalty_value(&self) -> S {
        let values = self.values();
        let sum: S = values.iter().copied().sum();
        self.sparsity_weight * sum / real::<S>(values.len() as f64)
    }

    /// Add the closed-form penalty gradient
    /// `sparsity_weight * temperature * g * (1 - g) / total` to parameter
    /// gradients, covering every gate whether or not its rows appeared in
    /// the batch. `grads` must mirror the layout of [`GateSet::params`].
    pub fn add_penalty_grads(&self, grads: &mut [Vec<S>]) -> Result<()> {
        let total = real::<S>(self.total_gates() as f64);
        let coeff = self.sparsity_weight * self.temperature / total;
        let tables: Vec<&Vec<S>> = match &self.params {
            GateParams::PerUnit(v) => vec![v],
            GateParams::PerEntry(tables) => tables.iter().collect(),
        };
        if grads.len() != tables.len() {
            return Err(Error::Contract(format!(
                "penalty grads: {} buffers against {} parameter tables",
                grads.len(),
                tables.len()
            )));
        }
        for (buf, table) in grads.iter_mut().zip(tables) {
            if buf.len() != table.len() {
                return Err(Error::Contract("penalty grad buffer length mismatch".into()));
            }
            for (gi, &p) in buf.iter_mut().zip(table.iter()) {
                let g = sigmoid(self.temperature * p);
                *gi += coeff * g * (S::one() - g);
            }
        }
        Ok(())
    }
}

/// Mean L1 penalty over an explicit list of gate values.
pub fn penalty_of_values<S: Real>(gates: &[S], sparsity_weight: S) -> Result<S> {
    if gates.is_empty() {
        return Err(Error::Domain("penalty of an empty gate set".into()));
    }
    let sum: S = gates.iter().map(|g| g.abs()).sum();
    Ok(sparsity_weight * sum / real::<S>(gates.len() as f64))
}

/// Snapshot statistics of a gate population.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Fraction of gates strictly below the 0.5 keep/prune line.
    pub frac_below_half: f64,
}

impl GateStats {
    pub fn from_values(values: &[f64]) -> GateStats {
        let n = values.len().max(1) as f64;
        let below = values.iter().filter(|&&v| v < 0.5).count() as f64;
        GateStats {
            mean: values.iter().sum::<f64>() / n,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            frac_below_half: below / n,
        }
    }
}
