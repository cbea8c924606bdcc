//! `zsiqa`: score image pairs, evaluate backbones on IQA datasets, convert
//! dataset layouts to manifests and generate the toy backbone.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid flags or run config,
//! 3 I/O or image decoding failure, 4 invalid input (shape, configuration,
//! backbone spec, manifest, dataset layout, degenerate statistics).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use zsiqa::backbone::{load_backbone, toy_backbone, TOY_SPEC_FILE};
use zsiqa::harness::{self, write_manifest, CorrelationReport, RunConfig};
use zsiqa::measures::{DEFAULT_EPSILON, DEFAULT_EUCLID_WEIGHT};
use zsiqa::pipeline::score_pair;
use zsiqa::{BackboneSpec, Error, MeasureConfig, MeasureKind, ScoreMode, ScoreRequest};

#[derive(Parser)]
#[command(name = "zsiqa", version, about = "Training-free full-reference image quality assessment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one reference/distorted pair (lower = more similar).
    Score(ScoreArgs),
    /// Evaluate a backbone/measure combination on a dataset manifest.
    Evaluate(EvaluateArgs),
    /// Convert a dataset distribution into a canonical manifest.
    Adapt(AdaptArgs),
    /// Write the seeded toy backbone graph and its spec.
    GenToy(GenToyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Feats,
    Emb,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    L2,
    #[value(alias = "cosine")]
    Cos,
    Skld,
    Jsd,
    Wsd,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatasetArg {
    Tid2013,
    Pipal,
}

#[derive(clap::Args)]
struct ScoreArgs {
    #[arg(long = "ref", value_name = "PATH")]
    reference: PathBuf,
    #[arg(long = "dist", value_name = "PATH")]
    distorted: PathBuf,
    /// Backbone spec file.
    #[arg(long, value_name = "SPEC")]
    backbone: PathBuf,
    #[arg(long, value_enum, default_value = "feats")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "cos")]
    measure: MeasureArg,
    /// Weight of the RMS term added to distribution measures.
    #[arg(long, default_value_t = DEFAULT_EUCLID_WEIGHT)]
    euclid_weight: f64,
    /// Smoothing added to channel distributions.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Override the tile stride of the backbone spec.
    #[arg(long, value_name = "PIXELS")]
    tile_stride: Option<usize>,
    /// Print the per-layer and per-tile breakdown as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    /// Run-config file.
    #[arg(long, value_name = "RUNCONFIG")]
    config: PathBuf,
    /// Worker threads; overrides the config value.
    #[arg(long, env = "ZSIQA_WORKERS")]
    workers: Option<usize>,
}

#[derive(clap::Args)]
struct AdaptArgs {
    #[arg(long, value_enum)]
    dataset: DatasetArg,
    /// Root directory of the dataset distribution.
    #[arg(long, value_name = "DIR")]
    root: PathBuf,
    /// Manifest file to write.
    #[arg(long, value_name = "MANIFEST")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct GenToyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::RunConfig(_) => 2,
        Error::Io { .. } | Error::Decode(_) => 3,
        Error::Shape(_)
        | Error::Config(_)
        | Error::Spec(_)
        | Error::DegenerateInput(_)
        | Error::Parse { .. }
        | Error::Duplicate { .. }
        | Error::Adapter(_) => 4,
        _ => 1,
    }
}

fn cmd_score(args: ScoreArgs) -> zsiqa::Result<()> {
    let mut spec = BackboneSpec::from_file(&args.backbone)?;
    if let Some(stride) = args.tile_stride {
        spec.tile_stride = stride;
    }
    let mode = match args.mode {
        ModeArg::Feats => ScoreMode::Feats,
        ModeArg::Emb => ScoreMode::Emb,
    };
    let kind = match args.measure {
        MeasureArg::L2 => MeasureKind::L2,
        MeasureArg::Cos => MeasureKind::Cosine,
        MeasureArg::Skld => MeasureKind::Skld,
        MeasureArg::Jsd => MeasureKind::Jsd,
        MeasureArg::Wsd => MeasureKind::Wsd,
    };
    let measure = MeasureConfig::new(kind)
        .with_euclid_weight(args.euclid_weight)
        .with_epsilon(args.epsilon);
    let session = load_backbone(&spec)?;
    let request = ScoreRequest::new(args.reference, args.distorted, mode, measure);
    let score = score_pair(&session, &request)?;
    if args.json {
        let text = serde_json::to_string_pretty(&score).map_err(|e| Error::Serialize(e.to_string()))?;
        println!("{text}");
    } else {
        println!("score={:.6}", score.value);
    }
    Ok(())
}

fn print_summary(reports: &[CorrelationReport]) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{:<12} {:>6} {:>6} {:>8} {:>8} {:>8}",
        "perturbation", "n", "errors", "plcc", "srcc", "krcc"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>6} {:>8.4} {:>8.4} {:>8.4}",
            r.perturbation.as_str(),
            r.n,
            r.errors,
            r.plcc,
            r.srcc,
            r.krcc
        );
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> zsiqa::Result<()> {
    let mut cfg = RunConfig::from_file(&args.config)?;
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    let reports = harness::run(&cfg)?;
    if let Some(first) = reports.first() {
        println!(
            "{} | {} | {} | {}",
            first.dataset, first.backbone, first.mode, first.measure
        );
    }
    print_summary(&reports);
    println!("report written to {}", cfg.output.display());
    Ok(())
}

fn cmd_adapt(args: AdaptArgs) -> zsiqa::Result<()> {
    let manifest = match args.dataset {
        DatasetArg::Tid2013 => harness::adapt_tid2013(&args.root)?,
        DatasetArg::Pipal => harness::adapt_pipal(&args.root)?,
    };
    write_manifest(&manifest, &args.out)?;
    println!("{} records written to {}", manifest.samples.len(), args.out.display());
    Ok(())
}

fn cmd_gen_toy(args: GenToyArgs) -> zsiqa::Result<()> {
    toy_backbone(args.seed).write_to(&args.out)?;
    println!("{}", args.out.join(TOY_SPEC_FILE).display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Adapt(args) => cmd_adapt(args),
        Command::GenToy(args) => cmd_gen_toy(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
