//! `sessionwatch` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sessionwatch::io::{
    load_lexicon, load_model, save_model, write_alerts, write_gain_table, write_metrics, GainRow, MetricsRow, Trace,
};
use sessionwatch::lr::TrainConfig;
use sessionwatch::scheduler::{ChunkMode, Policy};
use sessionwatch::sentiment::SentimentLexicon;
use sessionwatch::sim::{
    baseline_of, generate_workload, responsiveness_gain, run, sweep_thresholds, train_models, ClassifierMode, Models,
    RunConfig, TrainingOptions, WorkloadConfig,
};

const PREDICTOR_FILE: &str = "predictor.json";
const MAIN_FILE: &str = "main.json";

/// Raised for bad arguments or inputs; maps to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(
    name = "sessionwatch",
    version,
    about = "Prioritized streaming cyberbullying detection and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic trace as JSONL.
    Generate(GenerateArgs),
    /// Train the initial predictor and the main classifier from a labeled trace.
    Train(TrainArgs),
    /// Replay a trace through the engine and write metrics and alerts.
    Simulate(SimulateArgs),
    /// Gain of DYNAMIC over ROUND_ROBIN for a grid of thresholds and batch sizes.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct LexiconArgs {
    /// Sentiment lexicon TSV (word, polarity, subjectivity); bundled default if omitted.
    #[arg(long, requires = "negative_words")]
    lexicon: Option<PathBuf>,
    /// Negative-word list, one word per line.
    #[arg(long, requires = "lexicon")]
    negative_words: Option<PathBuf>,
}

impl LexiconArgs {
    fn load(&self) -> Result<SentimentLexicon> {
        match (&self.lexicon, &self.negative_words) {
            (Some(lex), Some(neg)) => {
                for p in [lex, neg] {
                    if !p.is_file() {
                        return Err(usage(format!("lexicon file not found: {}", p.display())));
                    }
                }
                load_lexicon(lex, neg).map_err(|e| usage(e.to_string()))
            }
            _ => Ok(SentimentLexicon::bundled()),
        }
    }
}

#[derive(Args)]
struct WorkloadArgs {
    /// Trace JSONL to replay; a workload is generated when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    sessions: usize,
    #[arg(long, default_value_t = 0.05)]
    bully_fraction: f64,
    /// Seed for the generated workload.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl WorkloadArgs {
    fn trace(&self) -> Result<Trace> {
        match &self.trace {
            Some(p) => read_trace(p),
            None => generate_workload(&WorkloadConfig {
                session_count: self.sessions,
                bully_fraction: self.bully_fraction,
                rng_seed: self.seed,
                ..WorkloadConfig::default()
            })
            .map_err(|e| usage(e.to_string())),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    sessions: usize,
    #[arg(long, default_value_t = 0.05)]
    bully_fraction: f64,
    #[arg(long, default_value_t = 2.0)]
    profile_signal: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled trace JSONL.
    #[arg(long)]
    trace: PathBuf,
    #[command(flatten)]
    lexicon: LexiconArgs,
    /// Directory for predictor.json and main.json.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1500)]
    epochs: usize,
    /// Precision floor when tuning the predictor threshold.
    #[arg(long, default_value_t = 0.44)]
    min_precision: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Dynamic,
    RoundRobin,
    Static,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Dynamic => Policy::Dynamic,
            PolicyArg::RoundRobin => Policy::RoundRobin,
            PolicyArg::Static => Policy::Static,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Incremental,
    Standard,
}

impl From<ModeArg> for ClassifierMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Incremental => ClassifierMode::Incremental,
            ModeArg::Standard => ClassifierMode::Standard,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChunkArg {
    Capped,
    All,
}

impl From<ChunkArg> for ChunkMode {
    fn from(c: ChunkArg) -> Self {
        match c {
            ChunkArg::Capped => ChunkMode::Capped,
            ChunkArg::All => ChunkMode::AllAvailable,
        }
    }
}

#[derive(Args)]
struct EngineArgs {
    /// Directory holding predictor.json and main.json.
    #[arg(long)]
    models: PathBuf,
    #[command(flatten)]
    lexicon: LexiconArgs,
    #[command(flatten)]
    workload: WorkloadArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Incremental)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ChunkArg::Capped)]
    chunk_mode: ChunkArg,
}

impl EngineArgs {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig {
            mode: self.mode.into(),
            ..RunConfig::default()
        };
        c.scheduler.chunk_mode = self.chunk_mode.into();
        c
    }

    fn models(&self) -> Result<Models> {
        let read = |name: &str| {
            let p = self.models.join(name);
            if !p.is_file() {
                return Err(usage(format!("model file not found: {}", p.display())));
            }
            load_model(&p).map_err(|e| usage(e.to_string()))
        };
        Ok(Models {
            predictor: read(PREDICTOR_FILE)?,
            main: read(MAIN_FILE)?,
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_enum, default_value_t = PolicyArg::Dynamic)]
    policy: PolicyArg,
    #[arg(long, default_value_t = 0.2)]
    confidence_threshold: f64,
    #[arg(long, default_value_t = 10)]
    batch_size: usize,
    /// Metrics CSV; stdout if omitted.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Alerts JSONL.
    #[arg(long)]
    alerts: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// Comma-separated confidence thresholds.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    thresholds: Vec<f64>,
    /// Comma-separated batch sizes.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    batch_sizes: Vec<usize>,
    /// Gain table CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_trace(path: &Path) -> Result<Trace> {
    if !path.is_file() {
        return Err(usage(format!("trace file not found: {}", path.display())));
    }
    Trace::load(path).map_err(|e| usage(e.to_string()))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn generate(args: GenerateArgs) -> Result<()> {
    let trace = generate_workload(&WorkloadConfig {
        session_count: args.sessions,
        bully_fraction: args.bully_fraction,
        profile_signal: args.profile_signal,
        rng_seed: args.seed,
        ..WorkloadConfig::default()
    })
    .map_err(|e| usage(e.to_string()))?;
    output(args.out.as_deref())?.write_all(trace.to_jsonl()?.as_bytes())?;
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let lexicon = args.lexicon.load()?;
    let trace = read_trace(&args.trace)?;
    let options = TrainingOptions {
        train: TrainConfig {
            epochs: args.epochs,
            seed: args.seed,
            ..TrainConfig::default()
        },
        min_precision: args.min_precision,
        ..TrainingOptions::default()
    };
    let report = train_models(&trace, &lexicon, &options)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    save_model(&report.models.predictor, &args.out_dir.join(PREDICTOR_FILE))?;
    save_model(&report.models.main, &args.out_dir.join(MAIN_FILE))?;
    let (pp, pr) = report.predictor_holdout;
    let (mp, mr) = report.main_holdout;
    println!(
        "predictor threshold {:.4} (train precision {:.3}, recall {:.3})",
        report.predictor_choice.threshold, report.predictor_choice.precision, report.predictor_choice.recall
    );
    println!("holdout predictor precision {pp:.3} recall {pr:.3}");
    println!("holdout main precision {mp:.3} recall {mr:.3}");
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let lexicon = args.engine.lexicon.load()?;
    let models = args.engine.models()?;
    let trace = args.engine.workload.trace()?;
    let mut config = args.engine.config();
    config.scheduler.policy = args.policy.into();
    config.scheduler.confidence_threshold = args.confidence_threshold;
    config.scheduler.batch_size = args.batch_size;
    config.scheduler.validate().map_err(|e| usage(e.to_string()))?;

    let out = run(&trace, &models, &lexicon, &config)?;
    let baseline = run(&trace, &models, &lexicon, &baseline_of(&config))?;
    let gain = responsiveness_gain(&baseline.metrics, &out.metrics, 1);
    let m = &out.metrics;
    let row = MetricsRow {
        policy: config.scheduler.policy.name().into(),
        classifier_mode: config.mode.name().into(),
        confidence_threshold: config.scheduler.confidence_threshold,
        batch_size: config.scheduler.batch_size,
        sessions: m.sessions,
        alerts: m.alerts,
        precision: m.precision,
        recall: m.recall,
        mean_gain: gain.mean,
        total_ticks: m.total_ticks,
    };
    write_metrics(output(args.metrics.as_deref())?, &[row])?;
    if let Some(p) = &args.alerts {
        write_alerts(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
            &out.alerts,
        )?;
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    if args.thresholds.is_empty() || args.batch_sizes.is_empty() {
        return Err(usage("sweep grid is empty: give --thresholds and --batch-sizes"));
    }
    let lexicon = args.engine.lexicon.load()?;
    let models = args.engine.models()?;
    let trace = args.engine.workload.trace()?;
    let base = args.engine.config();
    for &t in &args.thresholds {
        for &b in &args.batch_sizes {
            let mut c = base;
            c.scheduler.confidence_threshold = t;
            c.scheduler.batch_size = b;
            c.scheduler.validate().map_err(|e| usage(e.to_string()))?;
        }
    }
    let cells = sweep_thresholds(&trace, &models, &lexicon, &base, &args.thresholds, &args.batch_sizes)?;
    let rows: Vec<GainRow> = cells
        .iter()
        .map(|c| GainRow {
            confidence_threshold: c.confidence_threshold,
            batch_size: c.batch_size,
            mean_gain: c.mean_gain,
            gained_sessions: c.gained_sessions,
            alerts: c.dynamic.alerts,
            precision: c.dynamic.precision,
            recall: c.dynamic.recall,
            total_ticks: c.dynamic.total_ticks,
        })
        .collect();
    write_gain_table(output(args.out.as_deref())?, &rows)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Train(a) => train(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
