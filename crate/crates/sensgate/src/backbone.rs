//! Embedding-plus-MLP click model with optional gated-shuffle injection.
//!
//! The model embeds each categorical field, concatenates, and runs a small
//! MLP to one logit. When a [`GateSet`] is attached, the forward pass mixes
//! every unit's clean embedding signal with a batch-shuffled counterpart
//! under the unit's gate before the MLP sees it. Physical pruning rebuilds
//! the model without the rejected units.

use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adam::{AdamConfig, AdamState};
use crate::diffcore::{Tape, TensorId};
use crate::error::{Error, Result};
use crate::gates::{GateParams, GateSet, Granularity};
use crate::scalar::{real, Real};
use crate::seeds;
use crate::shuffle::{batch_shuffle, shuffle_indices, ShuffleUnit};

// ── Schema ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub vocab: usize,
    pub dim: usize,
    /// Column of the backing dataset this field reads. Identity for freshly
    /// built schemas; preserved through pruning so a pruned model can still
    /// evaluate against the original dataset.
    pub source_col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSchema {
    pub fields: Vec<FieldSpec>,
}

impl FieldSchema {
    pub fn new(fields: Vec<FieldSpec>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::Config("schema needs at least one field".into()));
        }
        for f in &fields {
            if f.name.is_empty() || f.vocab == 0 || f.dim == 0 {
                return Err(Error::Config(format!(
                    "field {:?}: name must be non-empty, vocab and dim positive",
                    f.name
                )));
            }
        }
        let mut names: Vec<&str> = fields.iter().map(|f| f.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != fields.len() {
            return Err(Error::Config("field names must be distinct".into()));
        }
        Ok(FieldSchema { fields })
    }

    /// Uniform schema: every field gets the same vocabulary and width, with
    /// identity source columns.
    pub fn uniform(names: &[String], vocab: usize, dim: usize) -> Result<Self> {
        Self::new(
            names
                .iter()
                .enumerate()
                .map(|(i, n)| FieldSpec { name: n.clone(), vocab, dim, source_col: i })
                .collect(),
        )
    }

    pub fn n_fields(&self) -> usize {
        self.fields.len()
    }

    /// Total concatenated embedding width `D`.
    pub fn total_dim(&self) -> usize {
        self.fields.iter().map(|f| f.dim).sum()
    }

    pub fn field_dims(&self) -> Vec<usize> {
        self.fields.iter().map(|f| f.dim).collect()
    }

    /// Column span of each field inside the concatenated embedding.
    pub fn column_ranges(&self) -> Vec<Range<usize>> {
        let mut out = Vec::with_capacity(self.fields.len());
        let mut start = 0;
        for f in &self.fields {
            out.push(start..start + f.dim);
            start += f.dim;
        }
        out
    }

    /// `(vocab, dim)` per field.
    pub fn tables(&self) -> Vec<(usize, usize)> {
        self.fields.iter().map(|f| (f.vocab, f.dim)).collect()
    }

    /// Content hash over field names, vocabulary sizes, and widths. Travels
    /// through checkpoints, prune decisions, and reports so stale artifacts
    /// are rejected instead of silently misapplied.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for f in &self.fields {
            hasher.update(f.name.as_bytes());
            hasher.update([0u8]);
            hasher.update(f.vocab.to_le_bytes());
            hasher.update(f.dim.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

// ── Parameters ─────────────────────────────────────────────────────────

/// Backbone hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Hidden layer widths; the output layer to a single logit is implied.
    pub hidden: Vec<usize>,
    pub adam: AdamConfig,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { hidden: vec![64, 32], adam: AdamConfig::default() }
    }
}

/// One dense layer, row-major `rows x cols` weight plus bias.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Layer<S> {
    pub w: Vec<S>,
    pub b: Vec<S>,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackboneParams<S> {
    /// One `vocab x dim` row-major table per field.
    pub embeddings: Vec<Vec<S>>,
    pub layers: Vec<Layer<S>>,
}

fn uniform_symmetric<S: Real>(rng: &mut ChaCha8Rng, half_width: f64) -> S {
    // Drawn as f64 regardless of the working precision so the generator
    // consumes the same stream either way.
    real::<S>((rng.gen::<f64>() * 2.0 - 1.0) * half_width)
}

impl<S: Real> BackboneParams<S> {
    /// Fan-in scaled uniform init: embeddings in `[-1/sqrt(d), 1/sqrt(d)]`,
    /// weights in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
    pub fn init(schema: &FieldSchema, hidden: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let embeddings = schema
            .fields
            .iter()
            .map(|f| {
                let bound = 1.0 / (f.dim as f64).sqrt();
                (0..f.vocab * f.dim).map(|_| uniform_symmetric(rng, bound)).collect()
            })
            .collect();
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = schema.total_dim();
        for &width in hidden.iter().chain(std::iter::once(&1)) {
            let bound = 1.0 / (fan_in as f64).sqrt();
            let w = (0..fan_in * width).map(|_| uniform_symmetric(rng, bound)).collect();
            layers.push(Layer { w, b: vec![S::zero(); width], rows: fan_in, cols: width });
            fan_in = width;
        }
        BackboneParams { embeddings, layers }
    }
}

/// Per-entry keep mask for entry-granularity pruning; `true` keeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryMask {
    pub kept: Vec<Vec<bool>>,
}

impl EntryMask {
    pub fn keep_all(tables: &[(usize, usize)]) -> Self {
        EntryMask { kept: tables.iter().map(|&(v, d)| vec![true; v * d]).collect() }
    }

    pub fn kept_count(&self) -> usize {
        self.kept.iter().map(|t| t.iter().filter(|&&k| k).count()).sum()
    }

    pub fn total(&self) -> usize {
        self.kept.iter().map(|t| t.len()).sum()
    }

    fn matches(&self, schema: &FieldSchema) -> bool {
        self.kept.len() == schema.fields.len()
            && self
                .kept
                .iter()
                .zip(&schema.fields)
                .all(|(t, f)| t.len() == f.vocab * f.dim)
    }

    /// Zero out the rejected entries of each table.
    pub fn apply<S: Real>(&self, embeddings: &mut [Vec<S>]) {
        for (table, kept) in embeddings.iter_mut().zip(&self.kept) {
            for (value, &keep) in table.iter_mut().zip(kept) {
                if !keep {
                    *value = S::zero();
                }
            }
        }
    }
}

// ── Forward graph ──────────────────────────────────────────────────────

/// How gates participate in a forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateMode {
    /// Plain model: no gates, no shuffling.
    Off,
    /// Training view: gated mix of clean and batch-shuffled signals.
    Mix,
    /// Gate scaling without the shuffled branch; used for prune-equivalence
    /// diagnostics.
    Scale,
}

/// On-tape handles for one registration of the parameters.
pub struct Binding {
    pub embeddings: Vec<TensorId>,
    pub weights: Vec<TensorId>,
    pub biases: Vec<TensorId>,
    pub gate_params: GateBinding,
}

pub enum GateBinding {
    None,
    /// Field granularity: one scalar tensor per field, so each field's gate
    /// can broadcast over its embedding block.
    FieldScalars(Vec<TensorId>),
    /// Dimension granularity: the whole unit vector at once.
    DimVector(TensorId),
    /// Entry granularity: one table tensor per field.
    EntryTables(Vec<TensorId>),
}

/// Check a gate population against a schema.
pub fn check_gate_shapes<S: Real>(schema: &FieldSchema, gates: &GateSet<S>) -> Result<()> {
    let ok = match (&gates.granularity, &gates.params) {
        (Granularity::Field, GateParams::PerUnit(p)) => p.len() == schema.n_fields(),
        (Granularity::Dimension { chunk }, GateParams::PerUnit(p)) => {
            *chunk > 0
                && schema.field_dims().iter().all(|d| d % chunk == 0)
                && p.len() == schema.total_dim() / chunk
        }
        (Granularity::Entry, GateParams::PerEntry(tables)) => {
            tables.len() == schema.n_fields()
                && tables
                    .iter()
                    .zip(&schema.fields)
                    .all(|(t, f)| t.len() == f.vocab * f.dim)
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "gate population does not match schema (granularity {})",
            gates.granularity.label()
        )))
    }
}

/// Register parameters (and gate parameters) on a tape.
pub fn register_binding<S: Real>(
    tape: &mut Tape<S>,
    schema: &FieldSchema,
    params: &BackboneParams<S>,
    gates: Option<&GateSet<S>>,
    trainable: bool,
) -> Result<Binding> {
    let mut embeddings = Vec::with_capacity(schema.n_fields());
    for (table, f) in params.embeddings.iter().zip(&schema.fields) {
        embeddings.push(tape.tensor(table.clone(), &[f.vocab, f.dim], trainable)?);
    }
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for layer in &params.layers {
        weights.push(tape.tensor(layer.w.clone(), &[layer.rows, layer.cols], trainable)?);
        biases.push(tape.tensor(layer.b.clone(), &[layer.cols], trainable)?);
    }
    let gate_params = match gates {
        None => GateBinding::None,
        Some(gs) => {
            check_gate_shapes(schema, gs)?;
            match (&gs.granularity, &gs.params) {
                (Granularity::Field, GateParams::PerUnit(p)) => GateBinding::FieldScalars(
                    p.iter()
                        .map(|&v| tape.tensor(vec![v], &[1], trainable))
                        .collect::<Result<_>>()?,
                ),
                (Granularity::Dimension { .. }, GateParams::PerUnit(p)) => {
                    GateBinding::DimVector(tape.tensor(p.clone(), &[p.len()], trainable)?)
                }
                (Granularity::Entry, GateParams::PerEntry(tables)) => GateBinding::EntryTables(
                    tables
                        .iter()
                        .zip(&schema.fields)
                        .map(|(t, f)| tape.tensor(t.clone(), &[f.vocab, f.dim], trainable))
                        .collect::<Result<_>>()?,
                ),
                _ => unreachable!("checked by check_gate_shapes"),
            }
        }
    };
    Ok(Binding { embeddings, weights, biases, gate_params })
}

/// Result of one forward construction.
pub struct ForwardGraph {
    pub logits: TensorId,
    /// The materialized per-unit gate vector for the sparsity penalty, when
    /// the granularity keeps one on the tape (field, dimension).
    pub unit_gates: Option<TensorId>,
}

fn column<'a>(x: &'a [u32], rows: usize, cols: usize, col: usize) -> impl Iterator<Item = u32> + 'a {
    (0..rows).map(move |r| x[r * cols + col])
}

/// Build the forward graph for a batch.
///
/// `x` is row-major `rows x cols` over the dataset's columns; each schema
/// field reads `x[:, field.source_col]`. `rng` drives the batch shuffling
/// and is required exactly when `mode` is [`GateMode::Mix`].
pub fn build_forward<S: Real>(
    tape: &mut Tape<S>,
    schema: &FieldSchema,
    binding: &Binding,
    gates: Option<&GateSet<S>>,
    mode: GateMode,
    x: &[u32],
    rows: usize,
    cols: usize,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<ForwardGraph> {
    if x.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "input length {} against {} x {}",
            x.len(),
            rows,
            cols
        )));
    }
    for f in &schema.fields {
        if f.source_col >= cols {
            return Err(Error::Config(format!(
                "field {} reads column {} of a {}-column input",
                f.name, f.source_col, cols
            )));
        }
    }
    if mode == GateMode::Mix && rng.is_none() {
        return Err(Error::Contract("Mix mode requires a generator".into()));
    }
    let gs = match (mode, gates) {
        (GateMode::Off, _) => None,
        (_, Some(gs)) => Some(gs),
        (_, None) => return Err(Error::Config("gated forward without a gate set".into())),
    };

    let (mixed, unit_gates) = match gs {
        None => {
            let mut parts = Vec::with_capacity(schema.n_fields());
            for (i, f) in schema.fields.iter().enumerate() {
                let idx: Vec<u32> = column(x, rows, cols, f.source_col).collect();
                parts.push(tape.gather_rows(binding.embeddings[i], &idx)?);
            }
            (tape.concat_cols(&parts)?, None)
        }
        Some(gs) => match &gs.granularity {
            Granularity::Field => {
                let GateBinding::FieldScalars(phis) = &binding.gate_params else {
                    return Err(Error::Contract("binding does not carry field gates".into()));
                };
                let mut parts = Vec::with_capacity(schema.n_fields());
                let mut g_nodes = Vec::with_capacity(schema.n_fields());
                for (i, f) in schema.fields.iter().enumerate() {
                    let idx: Vec<u32> = column(x, rows, cols, f.source_col).collect();
                    let clean = tape.gather_rows(binding.embeddings[i], &idx)?;
                    let g = gs.gate_nodes(tape, phis[i]);
                    g_nodes.push(g);
                    let part = match mode {
                        GateMode::Scale => tape.broadcast_mul(clean, g)?,
                        _ => {
                            let rng = rng.as_deref_mut().unwrap();
                            let shuffled_idx = shuffle_indices(&idx, rows, 1, 0, rng)?;
                            let shuffled = tape.gather_rows(binding.embeddings[i], &shuffled_idx)?;
                            gs.apply(tape, clean, shuffled, g)?
                        }
                    };
                    parts.push(part);
                }
                let mixed = tape.concat_cols(&parts)?;
                let g_all = tape.concat_cols(&g_nodes)?;
                (mixed, Some(g_all))
            }
            Granularity::Dimension { chunk } => {
                let GateBinding::DimVector(phi) = &binding.gate_params else {
                    return Err(Error::Contract("binding does not carry dimension gates".into()));
                };
                let mut parts = Vec::with_capacity(schema.n_fields());
                for (i, f) in schema.fields.iter().enumerate() {
                    let idx: Vec<u32> = column(x, rows, cols, f.source_col).collect();
                    parts.push(tape.gather_rows(binding.embeddings[i], &idx)?);
                }
                let concat = tape.concat_cols(&parts)?;
                let g_units = gs.gate_nodes(tape, *phi);
                let n_units = tape.numel(g_units);
                let g_cols = tape.expand_spans(g_units, &vec![*chunk; n_units])?;
                let mixed = match mode {
                    GateMode::Scale => tape.broadcast_mul(concat, g_cols)?,
                    _ => {
                        let unit = ShuffleUnit::per_column(schema.column_ranges(), *chunk)?;
                        let rng = rng.as_deref_mut().unwrap();
                        let shuffled = batch_shuffle(tape.data(concat), rows, &unit, rng)?;
                        let shape = tape.shape(concat).to_vec();
                        let shuffled = tape.constant(shuffled, &shape)?;
                        gs.apply(tape, concat, shuffled, g_cols)?
                    }
                };
                (mixed, Some(g_units))
            }
            Granularity::Entry => {
                let GateBinding::EntryTables(tables) = &binding.gate_params else {
                    return Err(Error::Contract("binding does not carry entry gates".into()));
                };
                let mut parts = Vec::with_capacity(schema.n_fields());
                for (i, f) in schema.fields.iter().enumerate() {
                    let idx: Vec<u32> = column(x, rows, cols, f.source_col).collect();
                    let clean = tape.gather_rows(binding.embeddings[i], &idx)?;
                    let g = gs.entry_gate_lookup(tape, tables[i], &idx)?;
                    let part = match mode {
                        GateMode::Scale => tape.broadcast_mul(clean, g)?,
                        _ => {
                            let unit = ShuffleUnit::per_column(vec![0..f.dim], 1)?;
                            let rng = rng.as_deref_mut().unwrap();
                            let shuffled = batch_shuffle(tape.data(clean), rows, &unit, rng)?;
                            let shuffled = tape.constant(shuffled, &[rows, f.dim])?;
                            gs.apply(tape, clean, shuffled, g)?
                        }
                    };
                    parts.push(part);
                }
                (tape.concat_cols(&parts)?, None)
            }
        },
    };

    let mut h = mixed;
    let last = binding.weights.len() - 1;
    for (li, (&w, &b)) in binding.weights.iter().zip(&binding.biases).enumerate() {
        h = tape.matmul(h, w)?;
        h = tape.add_bias(h, b)?;
        if li < last {
            h = tape.relu(h);
        }
    }
    Ok(ForwardGraph { logits: h, unit_gates })
}

// ── Trainer ────────────────────────────────────────────────────────────

/// Losses from one training step, at reporting precision.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepStats {
    pub task_loss: f64,
    pub penalty: f64,
    pub total_loss: f64,
}

/// Owns parameters, optimizer state, and the training-time shuffle stream.
#[derive(Debug, Clone)]
pub struct Trainer<S> {
    pub schema: FieldSchema,
    pub config: ModelConfig,
    pub params: BackboneParams<S>,
    pub adam: AdamState<S>,
    pub gates: Option<GateSet<S>>,
    pub mask: Option<EntryMask>,
    pub seed: u64,
    pub step: u64,
    pub(crate) rng: ChaCha8Rng,
}

impl<S: Real> Trainer<S> {
    pub fn new(
        schema: FieldSchema,
        config: ModelConfig,
        gates: Option<GateSet<S>>,
        mask: Option<EntryMask>,
        seed: u64,
    ) -> Result<Self> {
        if let Some(gs) = &gates {
            check_gate_shapes(&schema, gs)?;
        }
        if let Some(m) = &mask {
            if !m.matches(&schema) {
                return Err(Error::Config("entry mask does not match schema".into()));
            }
        }
        let mut init_rng = seeds::rng(seed, seeds::INIT, 0);
        let mut params = BackboneParams::init(&schema, &config.hidden, &mut init_rng);
        if let Some(m) = &mask {
            m.apply(&mut params.embeddings);
        }
        let adam = AdamState::new(&layout_sizes(&params, gates.as_ref()));
        Ok(Trainer {
            schema,
            config,
            params,
            adam,
            gates,
            mask,
            seed,
            step: 0,
            rng: seeds::rng(seed, seeds::SHUFFLE, 0),
        })
    }

    /// Resume from previously trained state (warm start). The optimizer
    /// restarts from zero moments.
    pub fn from_state(
        schema: FieldSchema,
        config: ModelConfig,
        params: BackboneParams<S>,
        gates: Option<GateSet<S>>,
        mask: Option<EntryMask>,
        seed: u64,
    ) -> Result<Self> {
        if let Some(gs) = &gates {
            check_gate_shapes(&schema, gs)?;
        }
        let mut params = params;
        if let Some(m) = &mask {
            if !m.matches(&schema) {
                return Err(Error::Config("entry mask does not match schema".into()));
            }
            m.apply(&mut params.embeddings);
        }
        let adam = AdamState::new(&layout_sizes(&params, gates.as_ref()));
        Ok(Trainer {
            schema,
            config,
            params,
            adam,
            gates,
            mask,
            seed,
            step: 0,
            rng: seeds::rng(seed, seeds::SHUFFLE, 0),
        })
    }

    /// One gradient step on a batch. `x` is row-major `rows x cols` in
    /// dataset columns; `y` holds one binary label per row.
    pub fn train_step(&mut self, x: &[u32], y: &[u8], cols: usize) -> Result<StepStats> {
        let rows = y.len();
        if rows == 0 {
            return Err(Error::Domain("empty training batch".into()));
        }
        let mut tape = Tape::new();
        let binding =
            register_binding(&mut tape, &self.schema, &self.params, self.gates.as_ref(), true)?;
        let mode = if self.gates.is_some() { GateMode::Mix } else { GateMode::Off };
        let fwd = build_forward(
            &mut tape,
            &self.schema,
            &binding,
            self.gates.as_ref(),
            mode,
            x,
            rows,
            cols,
            Some(&mut self.rng),
        )?;
        let task_id = tape.bce_mean(fwd.logits, y)?;
        let task = tape.value(task_id).to_f64().unwrap();

        let (loss_id, penalty) = match (&self.gates, fwd.unit_gates) {
            (Some(gs), Some(g_all)) => {
                let pen_id = gs.sparsity_penalty(&mut tape, g_all)?;
                let pen = tape.value(pen_id).to_f64().unwrap();
                (tape.add(task_id, pen_id)?, pen)
            }
            // Entry granularity: the penalty gradient is injected in closed
            // form below instead of materializing the full-population mean.
            (Some(gs), None) => (task_id, gs.penalty_value().to_f64().unwrap()),
            (None, _) => (task_id, 0.0),
        };
        let total = task + penalty;
        if !total.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite loss at step {}: task {}, penalty {}",
                self.step, task, penalty
            )));
        }
        tape.backward(loss_id)?;

        let mut grads = collect_model_grads(&tape, &binding, &self.params);
        let mut gate_grads = collect_gate_grads(&tape, &binding, self.gates.as_ref());

        if let Some(gs) = &self.gates {
            if self.step < gs.warmup_steps as u64 {
                for g in gate_grads.iter_mut() {
                    g.iter_mut().for_each(|v| *v = S::zero());
                }
            } else if matches!(gs.granularity, Granularity::Entry) {
                gs.add_penalty_grads(&mut gate_grads)?;
            }
        }
        grads.extend(gate_grads);

        let mut param_refs = param_vecs_mut(&mut self.params, self.gates.as_mut());
        self.adam.update(&self.config.adam, &mut param_refs, &grads)?;

        if let Some(m) = &self.mask {
            m.apply(&mut self.params.embeddings);
        }
        self.step += 1;
        Ok(StepStats { task_loss: task, penalty, total_loss: total })
    }

    /// Sigmoid probabilities for a row-major `rows x cols` input, evaluated
    /// in chunks. [`GateMode::Mix`] draws fresh permutations from `rng`.
    pub fn predict(
        &self,
        x: &[u32],
        rows: usize,
        cols: usize,
        mode: GateMode,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<Vec<f64>> {
        const CHUNK: usize = 8192;
        if x.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "input length {} against {} x {}",
                x.len(),
                rows,
                cols
            )));
        }
        let mut out = Vec::with_capacity(rows);
        let mut start = 0;
        while start < rows {
            let end = (start + CHUNK).min(rows);
            let mut tape: Tape<S> = Tape::new();
            let binding =
                register_binding(&mut tape, &self.schema, &self.params, self.gates.as_ref(), false)?;
            let fwd = build_forward(
                &mut tape,
                &self.schema,
                &binding,
                self.gates.as_ref(),
                mode,
                &x[start * cols..end * cols],
                end - start,
                cols,
                rng.as_deref_mut(),
            )?;
            out.extend(
                tape.data(fwd.logits)
                    .iter()
                    .map(|&v| crate::scalar::sigmoid(v.to_f64().unwrap())),
            );
            start = end;
        }
        Ok(out)
    }
}

fn layout_sizes<S: Real>(params: &BackboneParams<S>, gates: Option<&GateSet<S>>) -> Vec<usize> {
    let mut sizes: Vec<usize> = params.embeddings.iter().map(Vec::len).collect();
    for layer in &params.layers {
        sizes.push(layer.w.len());
        sizes.push(layer.b.len());
    }
    match gates.map(|g| &g.params) {
        None => {}
        Some(GateParams::PerUnit(p)) => sizes.push(p.len()),
        Some(GateParams::PerEntry(tables)) => sizes.extend(tables.iter().map(Vec::len)),
    }
    sizes
}

fn grad_or_zeros<S: Real>(tape: &Tape<S>, id: TensorId, len: usize) -> Vec<S> {
    tape.grad(id).map(|g| g.to_vec()).unwrap_or_else(|| vec![S::zero(); len])
}

fn collect_model_grads<S: Real>(
    tape: &Tape<S>,
    binding: &Binding,
    params: &BackboneParams<S>,
) -> Vec<Vec<S>> {
    let mut grads = Vec::new();
    for (&id, table) in binding.embeddings.iter().zip(&params.embeddings) {
        grads.push(grad_or_zeros(tape, id, table.len()));
    }
    for ((&w, &b), layer) in binding.weights.iter().zip(&binding.biases).zip(&params.layers) {
        grads.push(grad_or_zeros(tape, w, layer.w.len()));
        grads.push(grad_or_zeros(tape, b, layer.b.len()));
    }
    grads
}

fn collect_gate_grads<S: Real>(
    tape: &Tape<S>,
    binding: &Binding,
    gates: Option<&GateSet<S>>,
) -> Vec<Vec<S>> {
    match (&binding.gate_params, gates.map(|g| &g.params)) {
        (GateBinding::None, _) => Vec::new(),
        (GateBinding::FieldScalars(ids), Some(GateParams::PerUnit(p))) => {
            let mut flat = vec![S::zero(); p.len()];
            for (i, &id) in ids.iter().enumerate() {
                if let Some(g) = tape.grad(id) {
                    flat[i] = g[0];
                }
            }
            vec![flat]
        }
        (GateBinding::DimVector(id), Some(GateParams::PerUnit(p))) => {
            vec![grad_or_zeros(tape, *id, p.len())]
        }
        (GateBinding::EntryTables(ids), Some(GateParams::PerEntry(tables))) => ids
            .iter()
            .zip(tables)
            .map(|(&id, t)| grad_or_zeros(tape, id, t.len()))
            .collect(),
        _ => unreachable!("binding built from the same gate set"),
    }
}

fn param_vecs_mut<'a, S: Real>(
    params: &'a mut BackboneParams<S>,
    gates: Option<&'a mut GateSet<S>>,
) -> Vec<&'a mut Vec<S>> {
    let mut refs: Vec<&mut Vec<S>> = Vec::new();
    refs.extend(params.embeddings.iter_mut());
    for layer in params.layers.iter_mut() {
        refs.push(&mut layer.w);
        refs.push(&mut layer.b);
    }
    match gates.map(|g| &mut g.params) {
        None => {}
        Some(GateParams::PerUnit(p)) => refs.push(p),
        Some(GateParams::PerEntry(tables)) => refs.extend(tables.iter_mut()),
    }
    refs
}

// ── Physical pruning ───────────────────────────────────────────────────

/// What survives a pruning decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeptUnits {
    /// Indices of kept fields.
    Fields(Vec<usize>),
    /// Kept embedding columns per field; an empty list drops the field.
    Columns(Vec<Vec<usize>>),
    /// Per-entry keep mask; tables keep their shape.
    Entries(EntryMask),
}

/// Rebuild schema and parameters without the pruned units, copying retained
/// weights so the result can warm-start fine-tuning.
pub fn physical_prune<S: Real>(
    schema: &FieldSchema,
    params: &BackboneParams<S>,
    kept: &KeptUnits,
) -> Result<(FieldSchema, BackboneParams<S>, Option<EntryMask>)> {
    match kept {
        KeptUnits::Fields(ids) => {
            let mut ids = ids.clone();
            ids.sort_unstable();
            ids.dedup();
            if ids.is_empty() {
                return Err(Error::Config("pruning would keep zero fields".into()));
            }
            if *ids.last().unwrap() >= schema.n_fields() {
                return Err(Error::Config(format!(
                    "kept field {} out of {} fields",
                    ids.last().unwrap(),
                    schema.n_fields()
                )));
            }
            let cols: Vec<Vec<usize>> = (0..schema.n_fields())
                .map(|i| {
                    if ids.contains(&i) {
                        (0..schema.fields[i].dim).collect()
                    } else {
                        Vec::new()
                    }
                })
                .collect();
            prune_columns(schema, params, &cols)
        }
        KeptUnits::Columns(cols) => {
            if cols.len() != schema.n_fields() {
                return Err(Error::Config(format!(
                    "column decision covers {} fields, schema has {}",
                    cols.len(),
                    schema.n_fields()
                )));
            }
            prune_columns(schema, params, cols)
        }
        KeptUnits::Entries(mask) => {
            if !mask.matches(schema) {
                return Err(Error::Config("entry mask does not match schema".into()));
            }
            if mask.kept_count() == 0 {
                return Err(Error::Config("pruning would keep zero entries".into()));
            }
            let mut params = params.clone();
            mask.apply(&mut params.embeddings);
            Ok((schema.clone(), params, Some(mask.clone())))
        }
    }
}

fn prune_columns<S: Real>(
    schema: &FieldSchema,
    params: &BackboneParams<S>,
    cols: &[Vec<usize>],
) -> Result<(FieldSchema, BackboneParams<S>, Option<EntryMask>)> {
    let ranges = schema.column_ranges();
    let mut fields = Vec::new();
    let mut embeddings = Vec::new();
    let mut kept_rows: Vec<usize> = Vec::new();
    for (i, f) in schema.fields.iter().enumerate() {
        let keep = &cols[i];
        if keep.is_empty() {
            continue;
        }
        let mut sorted = keep.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if *sorted.last().unwrap() >= f.dim {
            return Err(Error::Config(format!(
                "kept column {} out of field {}'s width {}",
                sorted.last().unwrap(),
                f.name,
                f.dim
            )));
        }
        let table = &params.embeddings[i];
        let mut new_table = Vec::with_capacity(f.vocab * sorted.len());
        for v in 0..f.vocab {
            for &c in &sorted {
                new_table.push(table[v * f.dim + c]);
            }
        }
        kept_rows.extend(sorted.iter().map(|&c| ranges[i].start + c));
        fields.push(FieldSpec {
            name: f.name.clone(),
            vocab: f.vocab,
            dim: sorted.len(),
            source_col: f.source_col,
        });
        embeddings.push(new_table);
    }
    if fields.is_empty() {
        return Err(Error::Config("pruning would keep zero embedding columns".into()));
    }
    let first = &params.layers[0];
    let mut w = Vec::with_capacity(kept_rows.len() * first.cols);
    for &r in &kept_rows {
        w.extend_from_slice(&first.w[r * first.cols..(r + 1) * first.cols]);
    }
    let mut layers = Vec::with_capacity(params.layers.len());
    layers.push(Layer { w, b: first.b.clone(), rows: kept_rows.len(), cols: first.cols });
    layers.extend(params.layers[1..].iter().cloned());
    let schema = FieldSchema::new(fields)?;
    Ok((schema, BackboneParams { embeddings, layers }, None))
}
