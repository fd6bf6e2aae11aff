// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end: `detect`, `eval`, `synth` and `bench`.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 infeasible
//! configuration. Every flag can also be set through an `MDMP_*` variable.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use mdmp::bench::{self, KnnPlan, VariantPlan};
use mdmp::io::{load_csv, load_scores_csv, write_dataset_csv, write_scores_csv, LoadOptions};
use mdmp::synth::{generate_fixture, SynthKind, SynthSpec};
use mdmp::{
    auc_roc, detect_semisupervised, detect_supervised, detect_unsupervised, range_pr_auc,
    DetectorConfig, DimSelect, Error, ProfileVariant, Setup,
};

#[derive(Parser)]
#[command(
    name = "mdmp",
    version,
    about = "Multidimensional Matrix Profile anomaly detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every time step of a test series.
    Detect(DetectArgs),
    /// Evaluate a score file against labels.
    Eval(EvalArgs),
    /// Write a synthetic fixture with labeled anomalies.
    Synth(SynthArgs),
    /// Run a timing experiment and write the table as CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SetupArg {
    Unsupervised,
    Supervised,
    Semisupervised,
}

impl From<SetupArg> for Setup {
    fn from(s: SetupArg) -> Self {
        match s {
            SetupArg::Unsupervised => Setup::Unsupervised,
            SetupArg::Supervised => Setup::Supervised,
            SetupArg::Semisupervised => Setup::SemiSupervised,
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    /// Test series (CSV).
    #[arg(long, env = "MDMP_INPUT")]
    input: PathBuf,
    /// Training series (CSV); required for the supervised and semi-supervised setups.
    #[arg(long, env = "MDMP_TRAIN")]
    train: Option<PathBuf>,
    /// Use the training file's `is_anomaly` column as training labels.
    #[arg(long, env = "MDMP_TRAIN_LABELS")]
    train_labels: bool,
    #[arg(long, value_enum, default_value = "unsupervised", env = "MDMP_SETUP")]
    setup: SetupArg,
    /// Subsequence length.
    #[arg(long, env = "MDMP_M")]
    m: Option<usize>,
    /// Neighbor rank.
    #[arg(long, env = "MDMP_K")]
    k: Option<usize>,
    /// pre-sort, pre-max, post-sort, post-max or naive-sum.
    #[arg(long, env = "MDMP_VARIANT")]
    variant: Option<ProfileVariant>,
    /// first, mean or a column index.
    #[arg(long, env = "MDMP_DIM")]
    dim: Option<DimSelect>,
    /// Moving-average width (defaults to m, 0 disables).
    #[arg(long, env = "MDMP_SMOOTH")]
    smooth: Option<usize>,
    /// Forward-fill missing or non-finite cells.
    #[arg(long, env = "MDMP_IMPUTE")]
    impute: bool,
    /// Worker threads (0 picks one per core).
    #[arg(long, default_value_t = 0, env = "MDMP_JOBS")]
    jobs: usize,
    /// Score file to write (`index,score`).
    #[arg(long, env = "MDMP_OUTPUT")]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    AucRoc,
    AucPtrt,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, env = "MDMP_SCORES")]
    scores: PathBuf,
    /// Dataset CSV with an `is_anomaly` column.
    #[arg(long, env = "MDMP_LABELS")]
    labels: PathBuf,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "auc-roc,auc-ptrt",
        env = "MDMP_METRICS"
    )]
    metrics: Vec<Metric>,
}

#[derive(Args)]
struct SynthArgs {
    /// kofn, span, correlation, twin or walk.
    #[arg(long, env = "MDMP_KIND")]
    kind: SynthKind,
    #[arg(long, default_value_t = 4096, env = "MDMP_N")]
    n: usize,
    #[arg(long, default_value_t = 4, env = "MDMP_D")]
    d: usize,
    #[arg(long, default_value_t = 0, env = "MDMP_SEED")]
    seed: u64,
    /// Base period of the generated signals.
    #[arg(long, default_value_t = DetectorConfig::DEFAULT_M, env = "MDMP_M_HINT")]
    m_hint: usize,
    #[arg(long, env = "MDMP_OUT")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Variants,
    Knn,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, env = "MDMP_EXPERIMENT")]
    experiment: Experiment,
    /// Use the full-size grids instead of the desk-scale ones.
    #[arg(long, env = "MDMP_FULL")]
    full: bool,
    /// Override the number of trials per grid point.
    #[arg(long, env = "MDMP_TRIALS")]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0, env = "MDMP_SEED")]
    seed: u64,
    #[arg(long, env = "MDMP_OUT")]
    out: PathBuf,
}

fn usage_error(msg: &str) -> ! {
    Cli::command()
        .error(ErrorKind::MissingRequiredArgument, msg)
        .exit()
}

fn build_config(args: &DetectArgs) -> DetectorConfig {
    let base = DetectorConfig::for_setup(args.setup.into());
    DetectorConfig {
        m: args.m.unwrap_or(base.m),
        k: args.k.unwrap_or(base.k),
        variant: args.variant.unwrap_or(base.variant),
        dim_select: args.dim.unwrap_or(base.dim_select),
        smooth_window: args.smooth.or(base.smooth_window),
        setup: base.setup,
    }
}

/// Default grid with any axis the user fixed collapsed to that value.
fn build_grid(args: &DetectArgs) -> Vec<DetectorConfig> {
    let ms = args.m.map_or(DetectorConfig::GRID_M.to_vec(), |m| vec![m]);
    let ks = args.k.map_or(DetectorConfig::GRID_K.to_vec(), |k| vec![k]);
    let vs = args
        .variant
        .map_or(DetectorConfig::GRID_VARIANTS.to_vec(), |v| vec![v]);
    DetectorConfig::supervised_grid(&ms, &ks, &vs)
        .into_iter()
        .map(|c| DetectorConfig {
            dim_select: args.dim.unwrap_or(c.dim_select),
            smooth_window: args.smooth.or(c.smooth_window),
            ..c
        })
        .collect()
}

fn run_detect(args: DetectArgs) -> Result<(), Error> {
    let opts = LoadOptions {
        impute: args.impute,
    };
    let setup: Setup = args.setup.into();
    let train_path = match (setup, &args.train) {
        (Setup::Unsupervised, _) => None,
        (_, Some(p)) => Some(p.clone()),
        (_, None) => usage_error(&format!("--train is required for the {setup} setup")),
    };
    if setup == Setup::Supervised && !args.train_labels {
        usage_error("--train-labels is required for the supervised setup");
    }

    let test = load_csv::<f64>(&args.input, opts)?;
    let train = train_path.map(|p| load_csv::<f64>(&p, opts)).transpose()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .expect("thread pool");
    let scores = pool.install(|| -> Result<_, Error> {
        match (setup, train) {
            (Setup::Unsupervised, _) => {
                let cfg = build_config(&args);
                println!("config: {cfg}");
                detect_unsupervised(&test.series, &cfg)
            }
            (Setup::SemiSupervised, Some(train)) => {
                let cfg = build_config(&args);
                println!("config: {cfg}");
                detect_semisupervised(&train.series, &test.series, &cfg)
            }
            (Setup::Supervised, Some(train)) => {
                let labels = train.labels.ok_or_else(|| {
                    Error::InvalidSeries("training file has no is_anomaly column".into())
                })?;
                let grid = build_grid(&args);
                let outcome = detect_supervised(&train.series, &labels, &test.series, &grid)?;
                println!("config: {}", outcome.chosen);
                println!("train-auc-roc={}", outcome.train_metric);
                Ok(outcome.scores)
            }
            (_, None) => unreachable!("training data checked above"),
        }
    })?;
    write_scores_csv(&args.output, &scores)
}

fn run_eval(args: EvalArgs) -> Result<(), Error> {
    let scores = load_scores_csv::<f64>(&args.scores)?;
    let labels = load_csv::<f64>(&args.labels, LoadOptions::default())?
        .labels
        .ok_or_else(|| {
            Error::InvalidSeries(format!(
                "{} has no is_anomaly column",
                args.labels.display()
            ))
        })?;
    for metric in args.metrics {
        match metric {
            Metric::AucRoc => println!("auc-roc={}", auc_roc(&scores, &labels)?),
            Metric::AucPtrt => println!("auc-ptrt={}", range_pr_auc(&scores, &labels)?),
        }
    }
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<(), Error> {
    let spec = SynthSpec::new(args.kind, args.n, args.d, args.m_hint, args.seed);
    let data = generate_fixture::<f64>(&spec)?;
    write_dataset_csv(&args.out, &data)
}

fn run_bench(args: BenchArgs) -> Result<(), Error> {
    match args.experiment {
        Experiment::Variants => {
            let mut plan = if args.full {
                VariantPlan::full()
            } else {
                VariantPlan::desk()
            };
            plan.trials = args.trials.unwrap_or(plan.trials);
            let rows = bench::run_variant_plan(&plan, args.seed)?;
            bench::write_variant_timings(&args.out, &rows)?;
            println!("wrote {} rows to {}", rows.len(), args.out.display());
        }
        Experiment::Knn => {
            let mut plan = if args.full {
                KnnPlan::full()
            } else {
                KnnPlan::desk()
            };
            plan.trials = args.trials.unwrap_or(plan.trials);
            let rows = bench::run_knn_plan(&plan, args.seed)?;
            bench::write_knn_timings(&args.out, &rows)?;
            println!("wrote {} rows to {}", rows.len(), args.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => run_detect(a),
        Command::Eval(a) => run_eval(a),
        Command::Synth(a) => run_synth(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_infeasible_config() { 4 } else { 3 })
        }
    }
}
