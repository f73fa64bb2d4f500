//! The two-stage protocol: gated search, prune decision, physical prune,
//! retrain, and report assembly.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adam::AdamConfig;
use crate::backbone::{
    physical_prune, BackboneParams, EntryMask, FieldSchema, GateMode, KeptUnits, ModelConfig,
    Trainer,
};
use crate::baseline_pi::PiReport;
use crate::data::{Dataset, Split};
use crate::error::{Error, Result};
use crate::gates::{GateSet, GateStats, Granularity, INITIAL_GATE};
use crate::metrics::{
    evaluate, kendall_tau, polarization_report, ranking_desc, EvalResult, PolarizationReport,
};
use crate::scalar::{real, Real};
use crate::seeds;

/// Gate values this far below ~0 count as collapsed in polarization reports.
pub const POLARIZATION_EPSILON: f64 = 1e-3;
/// Gate values above `1 - delta` count as confidently kept.
pub const POLARIZATION_DELTA: f64 = 0.05;

// ── Configuration ──────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub granularity: Granularity,
    /// Sparsity penalty weight.
    pub alpha: f64,
    /// Gate temperature.
    pub tau: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Steps at the start of search during which gates receive no gradient.
    pub warmup_steps: usize,
    /// Validation cadence, in steps.
    pub eval_every: usize,
    pub seed: u64,
    pub embedding_dim: usize,
    pub hidden: Vec<usize>,
    pub adam: AdamConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            granularity: Granularity::Field,
            alpha: 0.01,
            tau: 5.0,
            epochs: 3,
            batch_size: 1024,
            warmup_steps: 100,
            eval_every: 200,
            seed: 0,
            embedding_dim: 8,
            hidden: vec![64, 32],
            adam: AdamConfig::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return Err(Error::Config("alpha must be finite and non-negative".into()));
        }
        if self.tau <= 0.0 || !self.tau.is_finite() {
            return Err(Error::Config("tau must be positive".into()));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be positive".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be at least 1".into()));
        }
        if self.embedding_dim == 0 {
            return Err(Error::Config("embedding_dim must be positive".into()));
        }
        if let Granularity::Dimension { chunk } = self.granularity {
            if chunk == 0 || self.embedding_dim % chunk != 0 {
                return Err(Error::Config(format!(
                    "chunk {} must divide embedding_dim {}",
                    chunk, self.embedding_dim
                )));
            }
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig { hidden: self.hidden.clone(), adam: self.adam.clone() }
    }

    fn gate_set<S: Real>(&self, schema: &FieldSchema) -> Result<GateSet<S>> {
        let tau = real::<S>(self.tau);
        let alpha = real::<S>(self.alpha);
        match self.granularity {
            Granularity::Field => {
                GateSet::field(schema.n_fields(), tau, alpha, self.warmup_steps)
            }
            Granularity::Dimension { chunk } => {
                GateSet::dimension(&schema.field_dims(), chunk, tau, alpha, self.warmup_steps)
            }
            Granularity::Entry => GateSet::entry(&schema.tables(), tau, alpha, self.warmup_steps),
        }
    }
}

// ── Search ─────────────────────────────────────────────────────────────

/// One sampled point of the gate trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: u64,
    pub mean_g: f64,
    pub frac_below_half: f64,
    /// Present on validation steps only.
    pub val_auc: Option<f64>,
    /// Per-gate values; omitted at entry granularity where the population
    /// is too large to trace.
    pub gates: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucPoint {
    pub step: u64,
    pub val_auc: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    /// Fingerprint of the model schema the search ran on.
    pub fingerprint: String,
    pub n_fields: usize,
    pub field_dims: Vec<usize>,
    /// `(vocab, dim)` per field, for reconstructing entry masks.
    pub tables: Vec<(usize, usize)>,
    pub total_units: usize,
    pub trace: Vec<TracePoint>,
    pub auc_curve: Vec<AucPoint>,
    /// Final per-gate values; omitted at entry granularity.
    pub final_gates: Option<Vec<f64>>,
    pub final_stats: Option<GateStats>,
    /// Units ordered by descending final gate value, stable ties by index.
    pub ranking: Vec<u64>,
    pub polarization: Option<PolarizationReport>,
    pub val_auc_final: Option<f64>,
    pub steps_run: u64,
    /// Full validation-split evaluations performed during search.
    pub n_eval_passes: usize,
    /// True when training aborted on a non-finite loss; the report is then
    /// partial and carries no final gate state.
    pub diverged: bool,
    pub wall_time_seconds: f64,
}

impl SearchReport {
    /// All final gate values, including the entry granularity's population
    /// (which the serialized report only summarizes).
    fn unit_values(&self) -> Result<&[f64]> {
        self.final_gates
            .as_deref()
            .ok_or_else(|| Error::State("search report carries no final gates".into()))
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome<S> {
    pub report: SearchReport,
    pub trainer: Trainer<S>,
}

/// Train backbone and gates jointly, recording the gate trajectory and a
/// shuffle-active validation AUC curve.
///
/// A non-finite training loss aborts the run and yields a partial report
/// with `diverged` set; any other failure is an error.
pub fn run_search<S: Real>(cfg: &SearchConfig, ds: &Dataset) -> Result<SearchOutcome<S>> {
    cfg.validate()?;
    let started = Instant::now();
    let schema = ds.schema_with_dim(cfg.embedding_dim)?;
    let gates = cfg.gate_set::<S>(&schema)?;
    let mut trainer = Trainer::new(schema.clone(), cfg.model_config(), Some(gates), None, cfg.seed)?;

    let (x_val, y_val) = ds.gather(ds.split_indices(Split::Val)?);
    let val_rows = y_val.len();
    let cols = ds.n_fields();
    let stats_every = (cfg.eval_every / 4).max(1) as u64;

    let mut trace: Vec<TracePoint> = Vec::new();
    let mut n_eval_passes = 0usize;
    let mut diverged = false;

    let record = |trainer: &Trainer<S>,
                      with_eval: bool,
                      trace: &mut Vec<TracePoint>,
                      passes: &mut usize|
     -> Result<()> {
        let gs = trainer.gates.as_ref().expect("search trainer carries gates");
        let values = gs.values_f64();
        let stats = GateStats::from_values(&values);
        let val_auc = if with_eval {
            let mut rng = seeds::rng(cfg.seed, seeds::EVAL, trainer.step);
            let probs = trainer.predict(&x_val, val_rows, cols, GateMode::Mix, Some(&mut rng))?;
            *passes += 1;
            Some(crate::metrics::auc(&probs, &y_val)?)
        } else {
            None
        };
        let keep_gates = !matches!(gs.granularity, Granularity::Entry);
        trace.push(TracePoint {
            step: trainer.step,
            mean_g: stats.mean,
            frac_below_half: stats.frac_below_half,
            val_auc,
            gates: keep_gates.then_some(values),
        });
        Ok(())
    };

    'epochs: for epoch in 0..cfg.epochs {
        for (xb, yb) in ds.batches(Split::Train, cfg.batch_size, cfg.seed, epoch as u64)? {
            match trainer.train_step(&xb, &yb, cols) {
                Ok(_) => {}
                Err(Error::Numeric(_)) => {
                    diverged = true;
                    break 'epochs;
                }
                Err(e) => return Err(e),
            }
            let step = trainer.step;
            if step % cfg.eval_every as u64 == 0 {
                record(&trainer, true, &mut trace, &mut n_eval_passes)?;
            } else if step % stats_every == 0 {
                record(&trainer, false, &mut trace, &mut n_eval_passes)?;
            }
        }
    }
    if !diverged && trace.last().map(|t| (t.step, t.val_auc.is_some())) != Some((trainer.step, true))
    {
        // Close the curve at the final step so the last recorded state is
        // always an evaluated one.
        trace.retain(|t| t.step != trainer.step);
        record(&trainer, true, &mut trace, &mut n_eval_passes)?;
    }

    let auc_curve: Vec<AucPoint> = trace
        .iter()
        .filter_map(|t| t.val_auc.map(|v| AucPoint { step: t.step, val_auc: v }))
        .collect();
    let (final_gates, final_stats, ranking, polarization, val_auc_final) = if diverged {
        (None, None, Vec::new(), None, None)
    } else {
        let gs = trainer.gates.as_ref().expect("search trainer carries gates");
        let values = gs.values_f64();
        let stats = GateStats::from_values(&values);
        let ranking = ranking_desc(&values);
        let polar = polarization_report(&values, POLARIZATION_EPSILON, POLARIZATION_DELTA)?;
        let final_auc = auc_curve.last().map(|p| p.val_auc);
        (Some(values), Some(stats), ranking, Some(polar), final_auc)
    };

    let report = SearchReport {
        config: cfg.clone(),
        fingerprint: schema.fingerprint(),
        n_fields: schema.n_fields(),
        field_dims: schema.field_dims(),
        tables: schema.tables(),
        total_units: trainer
            .gates
            .as_ref()
            .expect("search trainer carries gates")
            .total_gates(),
        trace,
        auc_curve,
        final_gates,
        final_stats,
        ranking,
        polarization,
        val_auc_final,
        steps_run: trainer.step,
        n_eval_passes,
        diverged,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    Ok(SearchOutcome { report, trainer })
}

// ── Prune decision ─────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneStrategy {
    /// Keep units whose gate is at or above 0.5.
    Threshold,
    /// Keep exactly the given number of highest-gate units.
    TopK(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneDecision {
    pub strategy: PruneStrategy,
    pub kept: KeptUnits,
    /// Fingerprint of the schema the decision applies to.
    pub fingerprint: String,
    pub kept_units: usize,
    pub total_units: usize,
    /// Kept fraction at the decision's granularity (feature retention for
    /// fields, dimension ratio for columns, entry ratio for entries).
    pub retention: f64,
}

/// Turn final gate values into a concrete keep set.
pub fn decide_prune(report: &SearchReport, strategy: PruneStrategy) -> Result<PruneDecision> {
    if report.diverged {
        return Err(Error::State("cannot prune from a diverged search".into()));
    }
    let values = report.unit_values()?;
    let total = values.len();
    let kept_ids: Vec<usize> = match strategy {
        PruneStrategy::Threshold => {
            let ids: Vec<usize> = (0..total).filter(|&i| values[i] >= 0.5).collect();
            if ids.is_empty() {
                return Err(Error::Config(
                    "threshold pruning keeps zero units; lower alpha so useful gates can stay open"
                        .into(),
                ));
            }
            ids
        }
        PruneStrategy::TopK(k) => {
            if k == 0 || k > total {
                return Err(Error::Config(format!(
                    "top-k must be in 1..={total}, got {k}"
                )));
            }
            let mut ids: Vec<usize> =
                report.ranking[..k].iter().map(|&u| u as usize).collect();
            ids.sort_unstable();
            ids
        }
    };

    let kept = match report.config.granularity {
        Granularity::Field => KeptUnits::Fields(kept_ids.clone()),
        Granularity::Dimension { chunk } => {
            let mut cols: Vec<Vec<usize>> = vec![Vec::new(); report.n_fields];
            let mut unit = 0usize;
            let mut lookup = Vec::with_capacity(total);
            for (f, &dim) in report.field_dims.iter().enumerate() {
                for local in 0..dim / chunk {
                    lookup.push((f, local));
                    unit += 1;
                }
            }
            debug_assert_eq!(unit, total);
            for &u in &kept_ids {
                let (f, local) = lookup[u];
                cols[f].extend(local * chunk..(local + 1) * chunk);
            }
            KeptUnits::Columns(cols)
        }
        Granularity::Entry => {
            let mut kept_flags: Vec<Vec<bool>> = report
                .tables
                .iter()
                .map(|&(v, d)| vec![false; v * d])
                .collect();
            let mut offsets = Vec::with_capacity(report.tables.len());
            let mut acc = 0usize;
            for &(v, d) in &report.tables {
                offsets.push(acc);
                acc += v * d;
            }
            for &u in &kept_ids {
                let t = offsets.partition_point(|&o| o <= u) - 1;
                kept_flags[t][u - offsets[t]] = true;
            }
            KeptUnits::Entries(EntryMask { kept: kept_flags })
        }
    };

    Ok(PruneDecision {
        strategy,
        kept,
        fingerprint: report.fingerprint.clone(),
        kept_units: kept_ids.len(),
        total_units: total,
        retention: kept_ids.len() as f64 / total as f64,
    })
}

// ── Retrain ────────────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct RetrainOutcome<S> {
    pub test: EvalResult,
    pub val: EvalResult,
    pub trainer: Trainer<S>,
    pub wall_time_seconds: f64,
}

/// Train a plain (gate-free) model for `epochs` over the training split.
pub fn train_plain<S: Real>(
    cfg: &SearchConfig,
    ds: &Dataset,
    schema: FieldSchema,
    params: Option<BackboneParams<S>>,
    mask: Option<EntryMask>,
    epochs: usize,
) -> Result<Trainer<S>> {
    let mut trainer = match params {
        None => Trainer::new(schema, cfg.model_config(), None, mask, cfg.seed)?,
        Some(p) => Trainer::from_state(schema, cfg.model_config(), p, None, mask, cfg.seed)?,
    };
    let cols = ds.n_fields();
    for epoch in 0..epochs {
        for (xb, yb) in ds.batches(Split::Train, cfg.batch_size, cfg.seed, epoch as u64)? {
            trainer.train_step(&xb, &yb, cols)?;
        }
    }
    Ok(trainer)
}

/// Gate-free evaluation of a model on one split.
pub fn evaluate_model<S: Real>(
    trainer: &Trainer<S>,
    ds: &Dataset,
    split: Split,
) -> Result<EvalResult> {
    let (x, y) = ds.gather(ds.split_indices(split)?);
    let probs = trainer.predict(&x, y.len(), ds.n_fields(), GateMode::Off, None)?;
    evaluate(&probs, &y)
}

/// Physically prune per the decision, then train the gate-free survivor:
/// from fresh initialization (`warm_start` false, the benchmark protocol)
/// or from the retained search weights (`warm_start` true, the deployment
/// mode). Returns validation and test evaluations of the result.
pub fn run_retrain<S: Real>(
    cfg: &SearchConfig,
    ds: &Dataset,
    search_schema: &FieldSchema,
    search_params: &BackboneParams<S>,
    decision: &PruneDecision,
    warm_start: bool,
    epochs_override: Option<usize>,
) -> Result<RetrainOutcome<S>> {
    let started = Instant::now();
    let actual = search_schema.fingerprint();
    if decision.fingerprint != actual {
        return Err(Error::Config(format!(
            "decision was made for schema {}, model has {}",
            decision.fingerprint, actual
        )));
    }
    let (schema, params, mask) = physical_prune(search_schema, search_params, &decision.kept)?;
    let epochs = epochs_override.unwrap_or(cfg.epochs);
    let trainer = train_plain(
        cfg,
        ds,
        schema,
        warm_start.then_some(params),
        mask,
        epochs,
    )?;
    let val = evaluate_model(&trainer, ds, Split::Val)?;
    let test = evaluate_model(&trainer, ds, Split::Test)?;
    Ok(RetrainOutcome { test, val, trainer, wall_time_seconds: started.elapsed().as_secs_f64() })
}

/// Absolute gap between the gate-equipped validation AUC at the end of
/// search and the pruned, retrained model's validation AUC.
pub fn wysiwyg_gap(search_val_auc: f64, retrain_val_auc: f64) -> f64 {
    (search_val_auc - retrain_val_auc).abs()
}

// ── Ranking stability across alpha ─────────────────────────────────────

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaStabilityReport {
    pub alphas: (f64, f64),
    /// Fraction of gates below 0.5 in each run.
    pub frac_below_half: (f64, f64),
    /// Rank correlation of the two importance orderings; absent when either
    /// run failed the broad-polarization precondition (between 25% and 99%
    /// of gates below 0.5).
    pub tau: Option<f64>,
    pub rankings: (Vec<u64>, Vec<u64>),
}

/// Run two searches differing only in alpha and compare their rankings.
pub fn alpha_stability<S: Real>(
    cfg: &SearchConfig,
    ds: &Dataset,
    alphas: (f64, f64),
) -> Result<AlphaStabilityReport> {
    let run = |alpha: f64| -> Result<SearchReport> {
        let cfg = SearchConfig { alpha, ..cfg.clone() };
        let out = run_search::<S>(&cfg, ds)?;
        if out.report.diverged {
            return Err(Error::Numeric(format!("search diverged at alpha {alpha}")));
        }
        Ok(out.report)
    };
    let a = run(alphas.0)?;
    let b = run(alphas.1)?;
    let fa = a.final_stats.as_ref().expect("non-diverged").frac_below_half;
    let fb = b.final_stats.as_ref().expect("non-diverged").frac_below_half;
    let polarized = |f: f64| (0.25..=0.99).contains(&f);
    let tau = if polarized(fa) && polarized(fb) {
        Some(kendall_tau(&a.ranking, &b.ranking)?)
    } else {
        None
    };
    Ok(AlphaStabilityReport {
        alphas,
        frac_below_half: (fa, fb),
        tau,
        rankings: (a.ranking, b.ranking),
    })
}

// ── Entry-granularity stress test ──────────────────────────────────────

#[derive(Debug, Clone)]
pub struct StressOutcome<S> {
    pub search: SearchReport,
    pub decision: PruneDecision,
    pub eval: EvalResult,
    pub trainer: Trainer<S>,
}

/// Entry-level search, a top-k mask keeping `keep_fraction` of all entries,
/// masked retrain, and test evaluation.
pub fn stress_entry<S: Real>(
    cfg: &SearchConfig,
    ds: &Dataset,
    keep_fraction: f64,
) -> Result<StressOutcome<S>> {
    if !matches!(cfg.granularity, Granularity::Entry) {
        return Err(Error::Config("stress test requires entry granularity".into()));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "keep_fraction must be in (0, 1], got {keep_fraction}"
        )));
    }
    let out = run_search::<S>(cfg, ds)?;
    if out.report.diverged {
        return Err(Error::Numeric("stress search diverged".into()));
    }
    let k = ((out.report.total_units as f64 * keep_fraction).ceil() as usize)
        .clamp(1, out.report.total_units);
    let decision = decide_prune(&out.report, PruneStrategy::TopK(k))?;
    let schema = ds.schema_with_dim(cfg.embedding_dim)?;
    let retrain =
        run_retrain::<S>(cfg, ds, &schema, &out.trainer.params, &decision, false, None)?;
    Ok(StressOutcome {
        search: out.report,
        decision,
        eval: retrain.test,
        trainer: retrain.trainer,
    })
}

// ── Alpha auto-tune ────────────────────────────────────────────────────

/// Gate departure that counts as "the penalty moved the gates" when probing
/// alpha rungs: large enough that the upward drift of a penalty-free run
/// (well under 0.02) can never trigger it.
pub const AUTO_TUNE_DEPARTURE: f64 = 0.05;

/// Find the smallest power-of-two multiple of 1e-4 whose sparsity pressure
/// moves the mean gate at least [`AUTO_TUNE_DEPARTURE`] away from its 0.99
/// start within the first epoch.
pub fn auto_tune_alpha<S: Real>(cfg: &SearchConfig, ds: &Dataset) -> Result<f64> {
    cfg.validate()?;
    let schema = ds.schema_with_dim(cfg.embedding_dim)?;
    let cols = ds.n_fields();
    let mut alpha = 1e-4;
    for _ in 0..25 {
        let probe_cfg = SearchConfig { alpha, ..cfg.clone() };
        let gates = probe_cfg.gate_set::<S>(&schema)?;
        let mut trainer =
            Trainer::new(schema.clone(), probe_cfg.model_config(), Some(gates), None, cfg.seed)?;
        let mut departed = false;
        for (xb, yb) in ds.batches(Split::Train, cfg.batch_size, cfg.seed, 0)? {
            trainer.train_step(&xb, &yb, cols)?;
            if trainer.step % 25 == 0 {
                let mean = trainer.gates.as_ref().expect("gated").stats().mean;
                if (mean - INITIAL_GATE).abs() >= AUTO_TUNE_DEPARTURE {
                    departed = true;
                    break;
                }
            }
        }
        if !departed {
            let mean = trainer.gates.as_ref().expect("gated").stats().mean;
            departed = (mean - INITIAL_GATE).abs() >= AUTO_TUNE_DEPARTURE;
        }
        if departed {
            return Ok(alpha);
        }
        alpha *= 2.0;
    }
    Err(Error::Config(
        "no alpha up to ~3.4 moved the mean gate within one epoch; the task \
         gradient pins every gate open"
            .into(),
    ))
}

// ── Report assembly and artifacts ──────────────────────────────────────

/// The one-JSON-per-run experiment record. Commands fill in their own
/// sections, so any field may still be absent.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunReport {
    /// Dataset source as given in the run configuration.
    pub dataset: Option<String>,
    pub search: Option<SearchReport>,
    pub retrain_val: Option<EvalResult>,
    pub retrain_test: Option<EvalResult>,
    pub retrain_wall_time_seconds: Option<f64>,
    pub wysiwyg_gap: Option<f64>,
    pub pi: Option<PiReport>,
}

impl RunReport {
    pub fn from_search(search: SearchReport) -> Self {
        RunReport { search: Some(search), ..RunReport::default() }
    }
}

pub fn save_report(report: &RunReport, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn save_decision(decision: &PruneDecision, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(decision)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn load_decision(path: &Path) -> Result<PruneDecision> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Serialize(e.to_string()))
}

/// Write the gate trajectory as CSV: one row per gate per sampled step, or
/// one `summary` row per step at entry granularity.
pub fn write_gate_trace(report: &SearchReport, path: &Path) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "step,gate_id,g_value,mean_g,frac_below_0.5,val_auc")?;
    for point in &report.trace {
        let val_auc = point.val_auc.map(|v| v.to_string()).unwrap_or_default();
        match &point.gates {
            Some(gates) => {
                for (id, g) in gates.iter().enumerate() {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        point.step, id, g, point.mean_g, point.frac_below_half, val_auc
                    )?;
                }
            }
            None => {
                writeln!(
                    out,
                    "{},summary,,{},{},{}",
                    point.step, point.mean_g, point.frac_below_half, val_auc
                )?;
            }
        }
    }
    Ok(())
}
