//! `mvpac`: generate two-view data, train classifiers, and run the
//! partitioned bound experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure or partial
//! results. `MVPAC_THREADS` caps the number of worker threads.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mvpac::bounds::{BoundConfig, BoundName};
use mvpac::data::{augment_and_scale, gen_synthetic, load_two_view, save_two_view, Partition, SyntheticConfig};
use mvpac::experiment::{
    fit_model, run_experiment, select, Algorithm, DatasetSource, ExperimentConfig, ExperimentError, Penalty,
};
use mvpac::qp::SolverOptions;
use mvpac::trainers::error_rate;
use serde_json::json;

#[derive(Parser)]
#[command(name = "mvpac", version, about = "Multi-view SVMs and PAC-Bayes bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic two-view dataset.
    Gen(GenArgs),
    /// Train one classifier on a dataset file.
    Train(TrainArgs),
    /// Run the partitioned experiment and report errors and bounds.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Features per view.
    #[arg(long, default_value_t = 50)]
    dim: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Scale of the class-signal magnitudes.
    #[arg(long, default_value_t = 0.25)]
    signal: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// SVM-1, SVM-2, SVM-3, MvSVM or SMvSVM.
    #[arg(long)]
    algorithm: String,
    /// SVM penalty; cross-validated when omitted.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ExperimentArgs {
    /// `synthetic` or a two-view data file.
    #[arg(long, default_value = "synthetic")]
    dataset: String,
    /// Fraction of the non-pool examples used for training.
    #[arg(long, default_value_t = 0.2)]
    setting: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 100.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    partitions: usize,
    /// Comma-separated bound names; all when omitted.
    #[arg(long, value_delimiter = ',')]
    bounds: Option<Vec<String>>,
    /// Comma-separated algorithm names; all when omitted.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    /// Noise level of the synthetic data.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Scale of the synthetic class-signal magnitudes.
    #[arg(long, default_value_t = 0.25)]
    signal: f64,
    /// Synthetic example count.
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Synthetic features per view.
    #[arg(long, default_value_t = 50)]
    dim: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
    Partial,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<ExperimentError>() {
            Some(ExperimentError::Usage(m)) => Failure::Usage(m.clone()),
            _ => Failure::Runtime(e),
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    let cfg = SyntheticConfig {
        seed: args.seed,
        n: args.n,
        d_per_view: args.dim,
        noise_sd: args.noise,
        signal_scale: args.signal,
    };
    let data = gen_synthetic(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    save_two_view(&data, &args.out).map_err(|e| Failure::Runtime(e.into()))?;
    Ok(())
}

fn train_penalty(args: &TrainArgs, algorithm: Algorithm) -> Result<Option<Penalty>, Failure> {
    match algorithm {
        Algorithm::Svm1 | Algorithm::Svm2 | Algorithm::Svm3 => {
            if args.c1.is_some() || args.c2.is_some() {
                return Err(Failure::Usage(format!("{algorithm} takes --c, not --c1/--c2")));
            }
            Ok(args.c.map(|c| Penalty::Single { c }))
        }
        Algorithm::MvSvm | Algorithm::SMvSvm => {
            if args.c.is_some() {
                return Err(Failure::Usage(format!("{algorithm} takes --c1 and --c2, not --c")));
            }
            match (args.c1, args.c2) {
                (Some(c1), Some(c2)) => Ok(Some(Penalty::Pair { c1, c2 })),
                (None, None) => Ok(None),
                _ => Err(Failure::Usage("give both --c1 and --c2, or neither".into())),
            }
        }
    }
}

fn cmd_train(args: &TrainArgs) -> Result<(), Failure> {
    let algorithm: Algorithm = args.algorithm.parse().map_err(|e: ExperimentError| Failure::Usage(e.to_string()))?;
    let fixed = train_penalty(args, algorithm)?;
    let raw = load_two_view(&args.dataset).map_err(|e| Failure::Runtime(e.into()))?;
    let data = augment_and_scale(&raw).map_err(|e| Failure::Runtime(e.into()))?;
    let part = Partition {
        train: data.labeled.clone(),
        prior_count: 0,
        test: Vec::new(),
        unlabeled: data.unlabeled.clone(),
    };
    let opts = SolverOptions::with_tol(args.tol);
    let (penalty, cv_error) = match fixed {
        Some(p) => (p, None),
        None => {
            let (p, e) = select(algorithm, &part.train, &part.unlabeled, 3, args.seed, &opts)
                .map_err(|e| Failure::Runtime(e.into()))?;
            (p, Some(e))
        }
    };
    let (weights, duals) = fit_model(algorithm, penalty, &part.train, &part.unlabeled, &opts)
        .map_err(|e| Failure::Runtime(e.into()))?;
    let training_error = error_rate(&weights, part.train.iter().map(|s| (&s.x, s.y)))
        .map_err(|e| Failure::Runtime(e.into()))?;
    let report = json!({
        "algorithm": algorithm,
        "penalty": penalty,
        "cv_error": cv_error,
        "training_error": training_error,
        "scale_factor": data.scale_factor,
        "weights": weights,
        "dual": duals,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    emit(&text, args.out.as_deref())?;
    Ok(())
}

fn parse_list<T: std::str::FromStr>(items: &Option<Vec<String>>, all: &[T]) -> Result<Vec<T>, Failure>
where
    T: Clone,
    T::Err: std::fmt::Display,
{
    match items {
        None => Ok(all.to_vec()),
        Some(names) => names
            .iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse::<T>().map_err(|e| Failure::Usage(e.to_string())))
            .collect(),
    }
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<(), Failure> {
    let dataset = if args.dataset == "synthetic" {
        DatasetSource::Synthetic(SyntheticConfig {
            seed: args.seed,
            n: args.n,
            d_per_view: args.dim,
            noise_sd: args.noise,
            signal_scale: args.signal,
        })
    } else {
        DatasetSource::File {
            path: PathBuf::from(&args.dataset),
        }
    };
    let mut config = ExperimentConfig::new(dataset, args.setting, args.seed);
    config.partitions = args.partitions;
    config.bounds = parse_list(&args.bounds, &BoundName::ALL)?;
    config.algorithms = parse_list(&args.algorithms, &Algorithm::ALL)?;
    config.bound_config = BoundConfig {
        delta: args.delta,
        sigma: args.sigma,
        eta: args.eta,
        ..BoundConfig::default()
    };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let report = run_experiment(&config).map_err(|e| Failure::from(anyhow::Error::from(e)))?;
    let text = match args.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    emit(&text, args.out.as_deref())?;
    for p in report.partitions.iter().filter(|p| !p.completed()) {
        eprintln!(
            "partition {} failed: {}",
            p.index,
            p.failure.as_deref().unwrap_or("unknown error")
        );
    }
    if report.complete {
        Ok(())
    } else {
        Err(Failure::Partial)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("MVPAC_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("MVPAC_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Train(a) => cmd_train(a),
        Command::Experiment(a) => cmd_experiment(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Partial) => {
            eprintln!("error: some partitions failed; the report is partial");
            ExitCode::from(2)
        }
    }
}
