//! Experiment front end over the core library: build dataset caches, train
//! configs across seeds, score saved checkpoints, and aggregate run reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sat_core::data::cache;
use sat_core::train::{collect_reports, csv, table};
use sat_core::{
    evaluate_checkpoint, train, DataError, DatasetSpec, ExperimentConfig, MeshSpec, Split,
    SuperpixelSpec, TrainError, TrajectorySpec,
};
use thiserror::Error;

// Training allocates and frees large activation tensors at a rate the system
// allocator handles poorly (it returns pages to the kernel on every batch).
#[global_allocator]
static ALLOC: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(name = "sat", version, about = "Simplicial attention network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a dataset into the cache without training anything.
    BuildData(BuildData),
    /// Train a config across its seeds, writing checkpoints and a report.
    Train(Train),
    /// Score a saved checkpoint on one dataset split.
    Evaluate(Evaluate),
    /// Aggregate report.json files into a CSV or an aligned text table.
    Report(Report),
}

#[derive(Args)]
struct BuildData {
    /// Experiment whose default dataset to build.
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Mesh and split seed. The superpixel build is deterministic and
    /// ignores it.
    #[arg(long)]
    seed: u64,
    /// Cache root to build into.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct Train {
    /// JSON file matching the experiment config schema.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Seed override: a single seed, a comma list, or an inclusive range
    /// like 0..4.
    #[arg(long)]
    seeds: Option<String>,
    /// Directory for per-seed checkpoints and report.json.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Full superpixel protocol: 55k/5k/10k splits and 100 epochs.
    #[arg(long)]
    full: bool,
}

#[derive(Args)]
struct Evaluate {
    /// Checkpoint written by `sat train`.
    #[arg(long, value_name = "FILE")]
    checkpoint: PathBuf,
    /// Dataset split: train, val or test.
    #[arg(long, default_value = "test")]
    split: String,
}

#[derive(Args)]
struct Report {
    /// Directory holding report.json files (searched one level deep).
    #[arg(long = "in", value_name = "DIR")]
    dir: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Txt)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Superpixel,
    Trajectory,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Txt,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("could not read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("could not write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Data(#[from] DataError),
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::BuildData(args) => build_data(args),
        Command::Train(args) => run_train(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Report(args) => run_report(args),
    }
}

fn build_data(args: BuildData) -> Result<(), CliError> {
    let spec = match args.experiment {
        Experiment::Superpixel => DatasetSpec::Superpixel(SuperpixelSpec::default()),
        Experiment::Trajectory => DatasetSpec::Trajectory(TrajectorySpec {
            mesh: MeshSpec { seed: args.seed, ..MeshSpec::default() },
            split_seed: args.seed,
            ..TrajectorySpec::default()
        }),
    };
    match &spec {
        DatasetSpec::Superpixel(s) => {
            let data = s.load_or_build(&args.out)?;
            println!(
                "superpixel dataset ready: {} train / {} val / {} test",
                data.train.len(),
                data.val.len(),
                data.test.len()
            );
        }
        DatasetSpec::Trajectory(s) => {
            let data = s.load_or_build(&args.out)?;
            println!(
                "trajectory dataset ready: {} train / {} test on a {}-vertex mesh",
                data.train.len(),
                data.test.len(),
                data.mesh.points.len()
            );
        }
    }
    println!("cached at {}", spec.cache_dir(&args.out).display());
    Ok(())
}

fn run_train(args: Train) -> Result<(), CliError> {
    let json = std::fs::read_to_string(&args.config)
        .map_err(|source| CliError::Read { path: args.config.clone(), source })?;
    let mut config = ExperimentConfig::from_json(&json)?;
    if let Some(spec) = &args.seeds {
        config.seeds = parse_seeds(spec)?;
        config.validate()?;
    }
    if args.full {
        apply_full(&mut config)?;
    }
    let report = train(&config, &cache::cache_root(), args.out.as_deref())?;
    print!("{}", table(std::slice::from_ref(&report)));
    if let Some(dir) = &args.out {
        println!("checkpoints and report.json written to {}", dir.display());
    }
    Ok(())
}

fn run_evaluate(args: Evaluate) -> Result<(), CliError> {
    let split: Split = args.split.parse().map_err(CliError::Train)?;
    let report = evaluate_checkpoint(&args.checkpoint, split, &cache::cache_root())?;
    let config = &report.config;
    println!(
        "{} on {} ({} activation{}), {} layers x {} channels",
        config.model.label(),
        config.experiment.label(),
        config.activation.label(),
        if config.signed { ", signed" } else { "" },
        config.layers,
        config.channels
    );
    println!("{} accuracy {:.4} over {} samples", split.label(), report.accuracy, report.samples);
    Ok(())
}

fn run_report(args: Report) -> Result<(), CliError> {
    let reports = collect_reports(&args.dir)?;
    if reports.is_empty() {
        return Err(CliError::Usage(format!(
            "no report.json files under {}",
            args.dir.display()
        )));
    }
    let body = match args.format {
        Format::Csv => csv(&reports),
        Format::Txt => table(&reports),
    };
    match &args.out {
        Some(path) => std::fs::write(path, &body)
            .map_err(|source| CliError::Write { path: path.clone(), source })?,
        None => print!("{body}"),
    }
    Ok(())
}

/// Accepts a single seed, a comma list, or an inclusive range like "0..4".
fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = |_| CliError::Usage(format!("could not parse seeds {text:?}"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(bad)?;
        let hi: u64 = hi.trim().trim_start_matches('=').parse().map_err(bad)?;
        if lo > hi {
            return Err(CliError::Usage(format!("seed range {text:?} is empty")));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|part| part.trim().parse().map_err(bad)).collect()
}

/// The full-protocol switch: 55k/5k/10k superpixel splits and 100 epochs.
fn apply_full(config: &mut ExperimentConfig) -> Result<(), CliError> {
    let DatasetSpec::Superpixel(spec) = &mut config.dataset else {
        return Err(CliError::Usage("--full only applies to superpixel runs".into()));
    };
    spec.train = 55_000;
    spec.val = 5_000;
    spec.test = 10_000;
    config.epochs = 100;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn seed_lists_ranges_and_singles_parse() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("0,2, 4").unwrap(), vec![0, 2, 4]);
        assert_eq!(parse_seeds("0..4").unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_seeds("1..=3").unwrap(), vec![1, 2, 3]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("4..1").is_err());
        assert!(parse_seeds("a,b").is_err());
    }

    #[test]
    fn full_flag_rewrites_the_superpixel_protocol() {
        let json = r#"{
            "experiment": "superpixel",
            "model": "gcn",
            "layers": 2,
            "channels": 16,
            "activation": "relu",
            "epochs": 30,
            "dataset": {"kind": "superpixel"}
        }"#;
        let mut config = ExperimentConfig::from_json(json).unwrap();
        apply_full(&mut config).unwrap();
        assert_eq!(config.epochs, 100);
        match &config.dataset {
            DatasetSpec::Superpixel(spec) => {
                assert_eq!((spec.train, spec.val, spec.test), (55_000, 5_000, 10_000));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn full_flag_is_superpixel_only() {
        let json = r#"{
            "experiment": "trajectory",
            "model": "scn",
            "layers": 2,
            "channels": 8,
            "activation": "tanh",
            "dataset": {"kind": "trajectory"}
        }"#;
        let mut config = ExperimentConfig::from_json(json).unwrap();
        assert!(matches!(apply_full(&mut config), Err(CliError::Usage(_))));
    }
}
