//! Command-line driver: dataset generation, gated search, prune decision,
//! retrain, permutation-importance baseline, and plot-data export.
//!
//! Every run is driven by a flat TOML config plus flag overrides; artifacts
//! land under `--out-dir` with stable names (`report.json`, `gates.csv`,
//! `decision.json`, `checkpoint.bin`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use sensgate::baseline_pi::permutation_importance;
use sensgate::checkpoint::Checkpoint;
use sensgate::data::{
    generate_synthetic, load_csv, save_csv, Dataset, FieldRole, Split, SyntheticSpec,
};
use sensgate::gates::Granularity;
use sensgate::pipeline::{
    auto_tune_alpha, decide_prune, load_decision, load_report, run_retrain, run_search,
    save_decision, save_report, train_plain, write_gate_trace, wysiwyg_gap, PruneStrategy,
    RunReport, SearchConfig,
};
use sensgate::{Error, Result};

#[derive(Parser)]
#[command(name = "sensgate", version, about = "Shuffle-gate feature selection for tabular click models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV with a ground-truth roles sidecar.
    GenData(GenDataArgs),
    /// Train backbone and gates jointly; writes report.json, gates.csv,
    /// and checkpoint.bin.
    Search(SearchArgs),
    /// Turn the search report's gate values into a prune decision.
    Prune(PruneArgs),
    /// Physically prune per decision.json and train the gate-free survivor.
    Retrain(SearchArgs),
    /// Permutation-importance baseline on a plain model.
    Pi(PiArgs),
    /// Export gate-histogram and AUC-curve plot data from report.json.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct SharedArgs {
    /// Run configuration file (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; drives data, init, shuffling, batching, and evaluation.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving all artifacts.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Sparsity weight; omit (here and in the config) to auto-tune.
    #[arg(long)]
    alpha: Option<f64>,
    /// Gate granularity.
    #[arg(long, value_enum)]
    granularity: Option<GranularityArg>,
    /// Column group size for dim granularity.
    #[arg(long)]
    chunk: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Dataset source: "synthetic" or a CSV path.
    #[arg(long)]
    data: Option<String>,
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[command(flatten)]
    shared: SharedArgs,
    #[arg(long)]
    n_informative: Option<usize>,
    #[arg(long)]
    n_redundant: Option<usize>,
    #[arg(long)]
    n_noise: Option<usize>,
    /// Vocabulary size shared by all generated fields.
    #[arg(long)]
    vocab: Option<usize>,
    /// Scale of the informative fields' logit contributions.
    #[arg(long)]
    effect_scale: Option<f64>,
    #[arg(long)]
    n_samples: Option<usize>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    shared: SharedArgs,
}

#[derive(Args, Debug)]
struct PruneArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// Keep rule: gates at or above 0.5, or the K largest.
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Unit budget for the topk strategy.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Debug)]
struct PiArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// Permutation repeats per field.
    #[arg(long)]
    repeats: Option<usize>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    shared: SharedArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    format: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GranularityArg {
    Field,
    Dim,
    Entry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum StrategyArg {
    Threshold,
    Topk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
}

/// The flat run configuration file. Every key has a default except `data`,
/// which any data-consuming command requires; unknown keys are rejected.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    data: Option<String>,
    label_column: String,
    n_informative: usize,
    n_redundant: usize,
    n_noise: usize,
    vocab: usize,
    effect_scale: f64,
    n_samples: usize,
    granularity: GranularityArg,
    chunk: usize,
    alpha: Option<f64>,
    tau: f64,
    epochs: usize,
    batch_size: usize,
    warmup_steps: usize,
    eval_every: usize,
    seed: u64,
    embedding_dim: usize,
    hidden: Vec<usize>,
    learning_rate: f64,
    prune_strategy: StrategyArg,
    top_k: usize,
    warm_start: bool,
    retrain_epochs: Option<usize>,
    pi_repeats: usize,
    out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spec = SyntheticSpec::default();
        let search = SearchConfig::default();
        RunConfig {
            data: None,
            label_column: "label".into(),
            n_informative: spec.n_informative,
            n_redundant: spec.n_redundant,
            n_noise: spec.n_noise,
            vocab: spec.vocab,
            effect_scale: spec.effect_scale,
            n_samples: spec.n_samples,
            granularity: GranularityArg::Field,
            chunk: 1,
            alpha: None,
            tau: search.tau,
            epochs: search.epochs,
            batch_size: search.batch_size,
            warmup_steps: search.warmup_steps,
            eval_every: search.eval_every,
            seed: search.seed,
            embedding_dim: search.embedding_dim,
            hidden: search.hidden,
            learning_rate: search.adam.learning_rate,
            prune_strategy: StrategyArg::Threshold,
            top_k: 0,
            warm_start: false,
            retrain_epochs: None,
            pi_repeats: 3,
            out_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    fn granularity(&self) -> Granularity {
        match self.granularity {
            GranularityArg::Field => Granularity::Field,
            GranularityArg::Dim => Granularity::Dimension { chunk: self.chunk },
            GranularityArg::Entry => Granularity::Entry,
        }
    }

    fn search_config(&self, alpha: f64) -> SearchConfig {
        let mut cfg = SearchConfig {
            granularity: self.granularity(),
            alpha,
            tau: self.tau,
            epochs: self.epochs,
            batch_size: self.batch_size,
            warmup_steps: self.warmup_steps,
            eval_every: self.eval_every,
            seed: self.seed,
            embedding_dim: self.embedding_dim,
            hidden: self.hidden.clone(),
            ..SearchConfig::default()
        };
        cfg.adam.learning_rate = self.learning_rate;
        cfg
    }

    fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n_informative: self.n_informative,
            n_redundant: self.n_redundant,
            n_noise: self.n_noise,
            vocab: self.vocab,
            effect_scale: self.effect_scale,
            n_samples: self.n_samples,
            seed: self.seed,
        }
    }
}

fn resolve(shared: &SharedArgs) -> Result<RunConfig> {
    let mut cfg = match &shared.config {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = shared.seed {
        cfg.seed = s;
    }
    if let Some(d) = &shared.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(a) = shared.alpha {
        cfg.alpha = Some(a);
    }
    if let Some(g) = shared.granularity {
        cfg.granularity = g;
    }
    if let Some(c) = shared.chunk {
        cfg.chunk = c;
    }
    if let Some(e) = shared.epochs {
        cfg.epochs = e;
    }
    if let Some(b) = shared.batch_size {
        cfg.batch_size = b;
    }
    if let Some(d) = &shared.data {
        cfg.data = Some(d.clone());
    }
    Ok(cfg)
}

fn load_data(cfg: &RunConfig) -> Result<Dataset> {
    let source = cfg.data.as_deref().ok_or_else(|| {
        Error::Config("no dataset configured; set data = \"synthetic\" or a CSV path".into())
    })?;
    let mut ds = if source == "synthetic" {
        generate_synthetic(&cfg.synthetic_spec())?
    } else {
        load_csv(Path::new(source), &cfg.label_column)?
    };
    ds.split(cfg.seed)?;
    Ok(ds)
}

fn report_path(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.join("report.json")
}

fn require_search<'a>(
    report: &'a RunReport,
    path: &Path,
) -> Result<&'a sensgate::pipeline::SearchReport> {
    report.search.as_ref().ok_or_else(|| {
        Error::State(format!("{} has no search section; run search first", path.display()))
    })
}

fn cmd_gen_data(cfg: &RunConfig) -> Result<()> {
    let ds = generate_synthetic(&cfg.synthetic_spec())?;
    fs::create_dir_all(&cfg.out_dir)?;
    let csv = cfg.out_dir.join("dataset.csv");
    save_csv(&ds, &csv, &cfg.label_column)?;
    write_roles(&ds, &cfg.out_dir.join("roles.csv"))?;
    println!(
        "wrote {} rows x {} fields to {}",
        ds.n_rows(),
        ds.n_fields(),
        csv.display()
    );
    Ok(())
}

fn write_roles(ds: &Dataset, path: &Path) -> Result<()> {
    let roles = ds
        .roles
        .as_ref()
        .ok_or_else(|| Error::State("dataset carries no role labels".into()))?;
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "field,role,source_field")?;
    for (spec, role) in ds.schema.fields.iter().zip(roles) {
        let (label, source) = match role {
            FieldRole::Informative => ("informative", ""),
            FieldRole::Redundant { of } => ("redundant", ds.schema.fields[*of].name.as_str()),
            FieldRole::Noise => ("noise", ""),
        };
        writeln!(out, "{},{},{}", spec.name, label, source)?;
    }
    Ok(())
}

fn cmd_search(cfg: &RunConfig) -> Result<()> {
    let ds = load_data(cfg)?;
    let alpha = match cfg.alpha {
        Some(a) => a,
        None => {
            let a = auto_tune_alpha::<f32>(&cfg.search_config(0.0), &ds)?;
            println!("auto-tuned alpha = {a}");
            a
        }
    };
    let out = run_search::<f32>(&cfg.search_config(alpha), &ds)?;
    fs::create_dir_all(&cfg.out_dir)?;
    Checkpoint::capture(&out.trainer).save(&cfg.out_dir.join("checkpoint.bin"))?;
    write_gate_trace(&out.report, &cfg.out_dir.join("gates.csv"))?;
    let diverged = out.report.diverged;
    let mut report = RunReport::from_search(out.report);
    report.dataset = cfg.data.clone();
    save_report(&report, &report_path(cfg))?;
    if diverged {
        return Err(Error::Numeric(
            "search diverged; partial report and checkpoint written".into(),
        ));
    }
    let search = report.search.as_ref().expect("just built from search");
    println!(
        "search: {} steps, {} gates, mean gate {:.3}, val auc {:.4}",
        search.steps_run,
        search.total_units,
        search.final_stats.as_ref().map_or(f64::NAN, |s| s.mean),
        search.val_auc_final.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_prune(cfg: &RunConfig, args: &PruneArgs) -> Result<()> {
    let strategy = match args.strategy.unwrap_or(cfg.prune_strategy) {
        StrategyArg::Threshold => PruneStrategy::Threshold,
        StrategyArg::Topk => PruneStrategy::TopK(args.k.unwrap_or(cfg.top_k)),
    };
    let path = report_path(cfg);
    let report = load_report(&path)?;
    let search = require_search(&report, &path)?;
    let decision = decide_prune(search, strategy)?;
    save_decision(&decision, &cfg.out_dir.join("decision.json"))?;
    println!(
        "kept {}/{} units ({:.1}%)",
        decision.kept_units,
        decision.total_units,
        100.0 * decision.retention
    );
    Ok(())
}

fn cmd_retrain(cfg: &RunConfig, shared: &SharedArgs) -> Result<()> {
    let ds = load_data(cfg)?;
    let path = report_path(cfg);
    let mut report = load_report(&path)?;
    let search = require_search(&report, &path)?.clone();
    let decision = load_decision(&cfg.out_dir.join("decision.json"))?;
    let trainer = Checkpoint::<f32>::load(&cfg.out_dir.join("checkpoint.bin"))?.restore()?;

    let expect = ds.schema_with_dim(search.config.embedding_dim)?.fingerprint();
    let have = trainer.schema.fingerprint();
    if expect != have {
        return Err(Error::Config(format!(
            "dataset schema {expect} does not match checkpoint schema {have}"
        )));
    }

    // Model-structural settings travel with the recorded search config;
    // training-loop flags may still be overridden at this invocation.
    let mut retrain_cfg = search.config.clone();
    if let Some(s) = shared.seed {
        retrain_cfg.seed = s;
    }
    if let Some(b) = shared.batch_size {
        retrain_cfg.batch_size = b;
    }
    let epochs_override = shared.epochs.or(cfg.retrain_epochs);

    let out = run_retrain::<f32>(
        &retrain_cfg,
        &ds,
        &trainer.schema,
        &trainer.params,
        &decision,
        cfg.warm_start,
        epochs_override,
    )?;
    report.retrain_val = Some(out.val);
    report.retrain_test = Some(out.test);
    report.retrain_wall_time_seconds = Some(out.wall_time_seconds);
    report.wysiwyg_gap = search.val_auc_final.map(|s| wysiwyg_gap(s, out.val.auc));
    save_report(&report, &path)?;
    match report.wysiwyg_gap {
        Some(gap) => println!(
            "retrain: test auc {:.4}, val auc {:.4}, wysiwyg gap {:.4}",
            out.test.auc, out.val.auc, gap
        ),
        None => println!("retrain: test auc {:.4}, val auc {:.4}", out.test.auc, out.val.auc),
    }
    Ok(())
}

fn cmd_pi(cfg: &RunConfig, args: &PiArgs) -> Result<()> {
    let ds = load_data(cfg)?;
    let repeats = args.repeats.unwrap_or(cfg.pi_repeats);
    let search_cfg = cfg.search_config(0.0);
    let schema = ds.schema_with_dim(cfg.embedding_dim)?;
    let trainer = train_plain::<f32>(&search_cfg, &ds, schema, None, None, cfg.epochs)?;
    let pi = permutation_importance(&trainer, &ds, Split::Val, repeats, cfg.seed)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let path = report_path(cfg);
    let mut report = if path.exists() { load_report(&path)? } else { RunReport::default() };
    if report.dataset.is_none() {
        report.dataset = cfg.data.clone();
    }
    println!(
        "pi: base auc {:.4}, {} eval passes over {} fields",
        pi.base_auc,
        pi.n_eval_passes,
        pi.importance.len()
    );
    report.pi = Some(pi);
    save_report(&report, &path)?;
    Ok(())
}

fn cmd_report(cfg: &RunConfig) -> Result<()> {
    let path = report_path(cfg);
    let report = load_report(&path)?;
    let search = require_search(&report, &path)?;

    let curve_path = cfg.out_dir.join("auc_curve.csv");
    let mut out = std::io::BufWriter::new(fs::File::create(&curve_path)?);
    writeln!(out, "source,step,val_auc")?;
    for p in &search.auc_curve {
        writeln!(out, "search,{},{}", p.step, p.val_auc)?;
    }
    if let Some(r) = &report.retrain_val {
        writeln!(out, "retrain,{},{}", search.steps_run, r.auc)?;
    }
    drop(out);
    println!("wrote {}", curve_path.display());

    match &search.final_gates {
        Some(gates) => {
            let hist_path = cfg.out_dir.join("gate_histogram.csv");
            write_histogram(gates, &hist_path)?;
            println!("wrote {}", hist_path.display());
        }
        None => eprintln!("run diverged; no final gates, histogram skipped"),
    }
    Ok(())
}

fn write_histogram(gates: &[f64], path: &Path) -> Result<()> {
    const BINS: usize = 20;
    let mut counts = [0usize; BINS];
    for &g in gates {
        let bin = ((g * BINS as f64) as usize).min(BINS - 1);
        counts[bin] += 1;
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "bin_lo,bin_hi,count")?;
    for (i, c) in counts.iter().enumerate() {
        let lo = i as f64 / BINS as f64;
        let hi = (i + 1) as f64 / BINS as f64;
        writeln!(out, "{lo},{hi},{c}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::GenData(args) => {
            let mut cfg = resolve(&args.shared)?;
            if let Some(v) = args.n_informative {
                cfg.n_informative = v;
            }
            if let Some(v) = args.n_redundant {
                cfg.n_redundant = v;
            }
            if let Some(v) = args.n_noise {
                cfg.n_noise = v;
            }
            if let Some(v) = args.vocab {
                cfg.vocab = v;
            }
            if let Some(v) = args.effect_scale {
                cfg.effect_scale = v;
            }
            if let Some(v) = args.n_samples {
                cfg.n_samples = v;
            }
            cmd_gen_data(&cfg)
        }
        Command::Search(args) => cmd_search(&resolve(&args.shared)?),
        Command::Prune(args) => cmd_prune(&resolve(&args.shared)?, args),
        Command::Retrain(args) => cmd_retrain(&resolve(&args.shared)?, &args.shared),
        Command::Pi(args) => cmd_pi(&resolve(&args.shared)?, args),
        Command::Report(args) => {
            let ReportFormat::Csv = args.format;
            cmd_report(&resolve(&args.shared)?)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
