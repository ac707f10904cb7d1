//! Command-line front end: dataset generation, policy training, evaluation
//! against fixed baselines, and the ablation table. Every command is
//! deterministic given its flags and seed; run timing goes to stderr so
//! output files stay bit-identical.

mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use manifest::RunManifest;
use rmm::checkpoint::Checkpoint;
use rmm::classifier::ClassifierConfig;
use rmm::env::PhaseExportRecord;
use rmm::memory::Frac;
use rmm::taskgen::{
    load_dataset, make_synthetic_dataset, make_target_task, phase_zero_source, write_dataset,
};
use rmm::trainer::{
    evaluate_policy, evaluate_policy_one_level, run_ablation, run_fixed_baseline, AblationMode,
    EvaluationReport, TrainConfig, TrainMode, TrainState, Trainer,
};
use rmm::{Dataset64, Error, Result};

#[derive(Parser)]
#[command(
    name = "rmm",
    version,
    about = "Reinforced memory management for class-incremental learning",
    after_help = "Exit codes: 0 success, 1 usage error, 2 runtime error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic Gaussian-cloud dataset file.
    GenData(GenDataArgs),
    /// Train the two-level allocation policy on pseudo tasks.
    Train(TrainArgs),
    /// Evaluate a policy or a fixed baseline on a benchmark task.
    Eval(EvalArgs),
    /// Run the ablation comparison table.
    Ablate(AblateArgs),
}

#[derive(Args, Serialize)]
struct GenDataArgs {
    /// Number of classes.
    #[arg(long, default_value_t = 20)]
    classes: usize,
    /// Feature dimension.
    #[arg(long, default_value_t = 16)]
    dim: usize,
    /// Samples per class.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Radius of the sphere class means are drawn on.
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset path (CSV).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct TrainArgs {
    /// Training dataset (pseudo tasks are generated from it).
    #[arg(long)]
    data: PathBuf,
    /// Output checkpoint path, rewritten every epoch.
    #[arg(long)]
    out: PathBuf,
    /// Training log (line-delimited JSON); defaults to `<out>.log.jsonl`.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Optional TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Resume from an existing checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CliTrainMode::TwoLevel)]
    mode: CliTrainMode,
    #[arg(long)]
    seed: Option<u64>,
    /// Total epochs (parameter updates) to reach.
    #[arg(long)]
    epochs: Option<usize>,
    /// Pseudo tasks per epoch (K).
    #[arg(long)]
    tasks_per_epoch: Option<usize>,
    /// Runs per pseudo task (Z).
    #[arg(long)]
    runs_per_task: Option<usize>,
    /// Incremental phases per task (N).
    #[arg(long)]
    phases: Option<usize>,
    /// Total memory budget of the target task, in samples.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    lr_level1: Option<f64>,
    #[arg(long)]
    lr_level2: Option<f64>,
    #[arg(long)]
    baseline_decay: Option<f64>,
    /// Episode worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Serialize)]
struct EvalArgs {
    /// Benchmark dataset; the target task is built from it.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    mode: CliEvalMode,
    /// Trained policy checkpoint (policy and one_level modes).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Fixed exemplar fraction, e.g. `0.28` or `2/7` (fixed mode).
    #[arg(long)]
    fraction: Option<String>,
    /// Incremental phases of the target task.
    #[arg(long, default_value_t = 5)]
    phases: usize,
    /// Total memory budget in samples.
    #[arg(long, default_value_t = 500)]
    budget: usize,
    /// Seed for the target task's class order and data split.
    #[arg(long, default_value_t = 0)]
    task_seed: u64,
    /// Number of evaluation episodes.
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    /// Base seed for evaluation episodes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Classifier epochs per phase.
    #[arg(long, default_value_t = 30)]
    classifier_epochs: usize,
    /// Exemplar-only fine-tuning epochs.
    #[arg(long, default_value_t = 20)]
    finetune_epochs: usize,
    /// Output stem; writes `<out>.report.jsonl`, `<out>.alloc.jsonl`,
    /// `<out>.summary.csv`, and `<out>.manifest.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct AblateArgs {
    /// Benchmark dataset; the target task uses all of it, policy training
    /// only its initial-phase half.
    #[arg(long)]
    data: PathBuf,
    /// Foreign dataset for the transferred mode.
    #[arg(long)]
    transfer_data: Option<PathBuf>,
    /// Comma-separated modes to run.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    modes: Vec<CliAblationMode>,
    /// Optional TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    tasks_per_epoch: Option<usize>,
    #[arg(long)]
    runs_per_task: Option<usize>,
    #[arg(long)]
    phases: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    lr_level1: Option<f64>,
    #[arg(long)]
    lr_level2: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for the target task's class order and data split.
    #[arg(long, default_value_t = 0)]
    task_seed: u64,
    /// Number of evaluation episodes per mode.
    #[arg(long, default_value_t = 5)]
    eval_seeds: usize,
    /// Base seed for evaluation episodes.
    #[arg(long, default_value_t = 0)]
    eval_seed: u64,
    /// Output stem; writes `<out>.csv`, `<out>.rows.jsonl`, and
    /// `<out>.manifest.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[clap(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
enum CliTrainMode {
    OneLevel,
    TwoLevel,
}

impl From<CliTrainMode> for TrainMode {
    fn from(mode: CliTrainMode) -> Self {
        match mode {
            CliTrainMode::OneLevel => TrainMode::OneLevel,
            CliTrainMode::TwoLevel => TrainMode::TwoLevel,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[clap(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
enum CliEvalMode {
    /// Greedy two-level policy from a checkpoint.
    Policy,
    /// Greedy level-1 policy with the level-2 ratio pinned to 0.5.
    OneLevel,
    /// Fixed allocation; requires --fraction, no checkpoint.
    Fixed,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[clap(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
enum CliAblationMode {
    Fixed,
    OneLevel,
    TwoLevel,
    Transferred,
}

impl From<CliAblationMode> for AblationMode {
    fn from(mode: CliAblationMode) -> Self {
        match mode {
            CliAblationMode::Fixed => AblationMode::Fixed,
            CliAblationMode::OneLevel => AblationMode::OneLevel,
            CliAblationMode::TwoLevel => AblationMode::TwoLevel,
            CliAblationMode::Transferred => AblationMode::Transferred,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let started = Instant::now();
    let outcome = match cli.command {
        Command::GenData(args) => cmd_gen_data(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Ablate(args) => cmd_ablate(args),
    };
    match outcome {
        Ok(()) => {
            eprintln!("done in {:.2}s", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Validation(_) | Error::Contract(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

/// Parses a fraction given as a decimal (`0.28`) or a ratio (`2/7`), exactly.
fn parse_fraction(raw: &str) -> Result<Frac> {
    let raw = raw.trim();
    let frac = if let Some((numer, denom)) = raw.split_once('/') {
        let numer: i64 = numer
            .trim()
            .parse()
            .map_err(|_| Error::validation(format!("bad fraction numerator {numer:?}")))?;
        let denom: i64 = denom
            .trim()
            .parse()
            .map_err(|_| Error::validation(format!("bad fraction denominator {denom:?}")))?;
        if denom == 0 {
            return Err(Error::validation("fraction denominator is zero"));
        }
        Frac::new(numer, denom)
    } else {
        let (int_part, frac_part) = raw.split_once('.').unwrap_or((raw, ""));
        if frac_part.len() > 15 || int_part.len() > 15 {
            return Err(Error::validation(format!("fraction {raw:?} has too many digits")));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || (int_part.is_empty() && frac_part.is_empty())
        {
            return Err(Error::validation(format!("cannot parse fraction {raw:?}")));
        }
        let scale = 10i64.pow(frac_part.len() as u32);
        let int_val: i64 = if int_part.is_empty() { 0 } else { int_part.parse().unwrap() };
        let frac_val: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().unwrap() };
        Frac::new(int_val * scale + frac_val, scale)
    };
    Ok(frac)
}

fn load_config(path: Option<&Path>) -> Result<TrainConfig> {
    match path {
        None => Ok(TrainConfig::default()),
        Some(path) => {
            let raw = std::fs::read_to_string(path)?;
            toml::from_str(&raw)
                .map_err(|e| Error::validation(format!("config {}: {e}", path.display())))
        }
    }
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for line in lines {
        writeln!(file, "{line}")?;
    }
    file.flush()?;
    Ok(())
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::internal(format!("encode: {e}")))
}

fn cmd_gen_data(args: GenDataArgs) -> Result<()> {
    let manifest = RunManifest::new("gen-data", args.seed, &args, vec![args.out.clone()]);
    let manifest_file = manifest.write(&args.out)?;
    let dataset = make_synthetic_dataset::<f64>(
        args.classes,
        args.dim,
        args.samples,
        args.separation,
        args.seed,
    )?;
    write_dataset(
        &dataset,
        &args.out,
        &[
            "schema: rmm-dataset v1".to_string(),
            format!("manifest: {}", manifest_file.display()),
            "header: dim,num_classes; rows: class_id,sample_id,features...".to_string(),
        ],
    )?;
    eprintln!(
        "wrote {} classes x {} samples to {}",
        args.classes,
        args.samples,
        args.out.display()
    );
    Ok(())
}

fn apply_train_overrides(config: &mut TrainConfig, args: &TrainArgs) {
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.epochs {
        config.epochs = v;
    }
    if let Some(v) = args.tasks_per_epoch {
        config.tasks_per_epoch = v;
    }
    if let Some(v) = args.runs_per_task {
        config.runs_per_task = v;
    }
    if let Some(v) = args.phases {
        config.num_phases = v;
    }
    if let Some(v) = args.budget {
        config.total_budget = v;
    }
    if let Some(v) = args.lr_level1 {
        config.lr_level1 = v;
    }
    if let Some(v) = args.lr_level2 {
        config.lr_level2 = v;
    }
    if let Some(v) = args.baseline_decay {
        config.baseline_decay = v;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
}

#[derive(Serialize)]
struct LogMeta<'a> {
    schema: &'static str,
    version: u32,
    manifest: &'a str,
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    apply_train_overrides(&mut config, &args);
    config.validate()?;
    let log_path = args
        .log
        .clone()
        .unwrap_or_else(|| manifest::suffixed(&args.out, ".log.jsonl"));
    let manifest = RunManifest::new(
        "train",
        config.seed,
        TrainManifestArgs { flags: &args, config: &config },
        vec![args.out.clone(), log_path.clone()],
    );
    let manifest_file = manifest.write(&args.out)?;
    let manifest_str = manifest_file.display().to_string();

    let source: Dataset64 = load_dataset(&args.data)?;
    let state = match &args.resume {
        Some(path) => Checkpoint::<f64>::load(path)?.into_state(),
        None => TrainState::init(&config),
    };
    let mut trainer = Trainer::resume(&config, &source, args.mode.into(), state)?;

    let mut log_lines = vec![json_line(&LogMeta {
        schema: "rmm-train-log",
        version: 1,
        manifest: &manifest_str,
    })?];
    write_lines(&log_path, &log_lines)?;
    while !trainer.is_finished() {
        let epoch_log = trainer.run_epoch()?;
        eprintln!(
            "epoch {:>4}: mean return {:.4}, baseline {:.4}",
            epoch_log.epoch, epoch_log.mean_return, epoch_log.baseline
        );
        log_lines.push(json_line(&epoch_log)?);
        write_lines(&log_path, &log_lines)?;
        Checkpoint::from_state(&trainer.state, Some(manifest_str.clone())).save(&args.out)?;
    }
    eprintln!(
        "trained {} epochs; checkpoint at {}",
        trainer.epochs_done(),
        args.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct TrainManifestArgs<'a> {
    flags: &'a TrainArgs,
    config: &'a TrainConfig,
}

#[derive(Serialize)]
struct ReportLine<'a> {
    seed_index: u64,
    per_phase: &'a [f64],
    average: f64,
    last: f64,
    manifest: &'a str,
}

#[derive(Serialize)]
struct AllocLine<'a> {
    seed_index: u64,
    phase: usize,
    series: &'static str,
    class_count: usize,
    total_samples: usize,
    avg_per_class: f64,
    manifest: &'a str,
}

fn alloc_lines(
    seed_index: u64,
    records: &[PhaseExportRecord],
    manifest: &str,
) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    for record in records.iter().filter(|r| r.phase > 0) {
        for (series, counts) in [
            ("old", &record.exemplars_per_class),
            ("new", &record.loaded_per_class),
        ] {
            let class_count = counts.len();
            let total_samples: usize = counts.values().sum();
            lines.push(json_line(&AllocLine {
                seed_index,
                phase: record.phase,
                series,
                class_count,
                total_samples,
                avg_per_class: if class_count == 0 {
                    0.0
                } else {
                    total_samples as f64 / class_count as f64
                },
                manifest,
            })?);
        }
    }
    Ok(lines)
}

fn write_report_files(
    out: &Path,
    report: &EvaluationReport,
    manifest_str: &str,
) -> Result<()> {
    let meta = |schema| LogMeta { schema, version: 1, manifest: manifest_str };
    let mut report_lines = vec![json_line(&meta("rmm-eval-report"))?];
    let mut alloc = vec![json_line(&meta("rmm-alloc-trajectory"))?];
    let mut summary = vec![
        format!("# manifest: {manifest_str}"),
        "# schema: rmm-eval-summary v1".to_string(),
        "seed,average,last".to_string(),
    ];
    for seed in &report.seeds {
        report_lines.push(json_line(&ReportLine {
            seed_index: seed.seed_index,
            per_phase: &seed.per_phase,
            average: seed.average,
            last: seed.last,
            manifest: manifest_str,
        })?);
        alloc.extend(alloc_lines(seed.seed_index, &seed.allocation, manifest_str)?);
        summary.push(format!("{},{},{}", seed.seed_index, seed.average, seed.last));
    }
    summary.push(format!("mean,{},{}", report.mean_average, report.mean_last));
    write_lines(&manifest::suffixed(out, ".report.jsonl"), &report_lines)?;
    write_lines(&manifest::suffixed(out, ".alloc.jsonl"), &alloc)?;
    write_lines(&manifest::suffixed(out, ".summary.csv"), &summary)?;
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let outputs = vec![
        manifest::suffixed(&args.out, ".report.jsonl"),
        manifest::suffixed(&args.out, ".alloc.jsonl"),
        manifest::suffixed(&args.out, ".summary.csv"),
    ];
    let manifest = RunManifest::new("eval", args.seed, &args, outputs);
    let manifest_file = manifest.write(&args.out)?;
    let manifest_str = manifest_file.display().to_string();

    let source: Dataset64 = load_dataset(&args.data)?;
    let target = make_target_task(&source, args.phases, args.budget, args.task_seed)?;
    let classifier = ClassifierConfig {
        epochs: args.classifier_epochs,
        finetune_epochs: args.finetune_epochs,
        ..ClassifierConfig::default()
    };

    let report = match args.mode {
        CliEvalMode::Fixed => {
            let raw = args.fraction.as_deref().ok_or_else(|| {
                Error::validation("fixed mode requires --fraction")
            })?;
            let fraction = parse_fraction(raw)?;
            run_fixed_baseline(&target, fraction, &classifier, args.seeds, args.seed)?
        }
        CliEvalMode::Policy | CliEvalMode::OneLevel => {
            let path = args.checkpoint.as_deref().ok_or_else(|| {
                Error::validation("policy modes require --checkpoint")
            })?;
            let params = Checkpoint::<f64>::load(path)?.into_state().params;
            match args.mode {
                CliEvalMode::Policy => {
                    evaluate_policy(&params, &target, &classifier, args.seeds, args.seed)?
                }
                _ => evaluate_policy_one_level(
                    &params,
                    &target,
                    &classifier,
                    args.seeds,
                    args.seed,
                )?,
            }
        }
    };
    write_report_files(&args.out, &report, &manifest_str)?;
    eprintln!(
        "mean average accuracy {:.4}, mean last-phase accuracy {:.4}",
        report.mean_average, report.mean_last
    );
    Ok(())
}

fn cmd_ablate(args: AblateArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.epochs {
        config.epochs = v;
    }
    if let Some(v) = args.tasks_per_epoch {
        config.tasks_per_epoch = v;
    }
    if let Some(v) = args.runs_per_task {
        config.runs_per_task = v;
    }
    if let Some(v) = args.phases {
        config.num_phases = v;
    }
    if let Some(v) = args.budget {
        config.total_budget = v;
    }
    if let Some(v) = args.lr_level1 {
        config.lr_level1 = v;
    }
    if let Some(v) = args.lr_level2 {
        config.lr_level2 = v;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    config.validate()?;

    let modes: Vec<AblationMode> = args.modes.iter().map(|&m| m.into()).collect();
    if modes.contains(&AblationMode::Transferred) && args.transfer_data.is_none() {
        return Err(Error::validation(
            "transferred mode requires --transfer-data",
        ));
    }

    let outputs = vec![
        manifest::suffixed(&args.out, ".csv"),
        manifest::suffixed(&args.out, ".rows.jsonl"),
    ];
    let manifest = RunManifest::new(
        "ablate",
        config.seed,
        AblateManifestArgs { flags: &args, config: &config },
        outputs,
    );
    let manifest_file = manifest.write(&args.out)?;
    let manifest_str = manifest_file.display().to_string();

    let dataset: Dataset64 = load_dataset(&args.data)?;
    let target =
        make_target_task(&dataset, config.num_phases, config.total_budget, args.task_seed)?;
    // Policy training may only see the initial phase's data.
    let pseudo_source = phase_zero_source(&target)?;
    let transfer = args
        .transfer_data
        .as_deref()
        .map(load_dataset::<f64>)
        .transpose()?;

    let rows = run_ablation(
        &config,
        &pseudo_source,
        &target,
        &modes,
        transfer.as_ref(),
        args.eval_seeds,
        args.eval_seed,
    )?;

    let mut table = vec![
        format!("# manifest: {manifest_str}"),
        "# schema: rmm-ablation-table v1".to_string(),
        "mode,average,last,best_fraction".to_string(),
    ];
    let mut detail = vec![json_line(&LogMeta {
        schema: "rmm-ablation-rows",
        version: 1,
        manifest: &manifest_str,
    })?];
    for row in &rows {
        table.push(format!(
            "{},{},{},{}",
            row.mode.name(),
            row.average,
            row.last,
            row.best_fraction.map_or(String::new(), |f| f.to_string())
        ));
        detail.push(json_line(row)?);
        eprintln!(
            "{:>12}: avg {:.4}, last {:.4}",
            row.mode.name(),
            row.average,
            row.last
        );
    }
    write_lines(&manifest::suffixed(&args.out, ".csv"), &table)?;
    write_lines(&manifest::suffixed(&args.out, ".rows.jsonl"), &detail)?;
    Ok(())
}

#[derive(Serialize)]
struct AblateManifestArgs<'a> {
    flags: &'a AblateArgs,
    config: &'a TrainConfig,
}
