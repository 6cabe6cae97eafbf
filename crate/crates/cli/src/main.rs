//! `ocslab`: train, apply, and benchmark one-class slab SVMs from the
//! command line.
//!
//! Exit codes: 0 success, 1 I/O or data error, 2 usage error, 3 solver
//! stopped on its iteration budget (partial output still written).

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "ocslab", version, about = "One-class slab SVM toolkit")]
pub struct Cli {
    /// Seed for every random choice (data generation, fold shuffles).
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads for per-class benchmarks and grid search;
    /// single trainings always run on one thread.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Report destination; `-` writes to stdout.
    #[arg(long, global = true, default_value = "-")]
    pub output: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DataFormat {
    Letter,
    Libsvm,
    Csv,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input path; `-` reads stdin.
    #[arg(long)]
    pub data: String,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    pub data_format: DataFormat,
    /// Class column name for CSV input.
    #[arg(long, default_value = "label")]
    pub label_column: String,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Kernel family: linear, rbf, intersection, hellinger, chi2.
    #[arg(long, default_value = "linear")]
    pub kernel: String,
    /// RBF width; required for (and only valid with) the rbf kernel.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on one class and write it to a model file.
    Train {
        #[command(flatten)]
        data: DataArgs,
        /// Class whose rows form the training set; required when the
        /// input carries multiple classes.
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 0.10)]
        nu1: f64,
        #[arg(long, default_value_t = 0.01)]
        nu2: f64,
        #[arg(long, default_value_t = 2.0 / 3.0)]
        epsilon: f64,
        /// Train the single-hyperplane baseline instead of the slab.
        #[arg(long)]
        baseline_ocsvm: bool,
        /// Baseline outlier bound (with --baseline-ocsvm).
        #[arg(long, default_value_t = 0.1)]
        nu: f64,
        #[arg(long)]
        model_out: String,
    },
    /// Label samples with a trained model; one `label score` pair per row.
    Predict {
        #[arg(long)]
        model: String,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Evaluate a model against held-out positives and negatives.
    Eval {
        #[arg(long)]
        model: String,
        #[arg(long)]
        positives: String,
        #[arg(long)]
        negatives: String,
        #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
        data_format: DataFormat,
        #[arg(long, default_value = "label")]
        label_column: String,
    },
    /// Seeded 2-D Normal experiment: sweep epsilon and report the
    /// fraction of training points labeled positive.
    Toy {
        #[arg(long, default_value_t = 1500)]
        count: usize,
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 0.1)]
        nu1: f64,
        #[arg(long, default_value_t = 0.05)]
        nu2: f64,
        /// Write a 200x200 `x,y,score,label` decision grid (from the
        /// epsilon = 2/3 model) to this path.
        #[arg(long)]
        grid_out: Option<String>,
    },
    /// Per-class one-vs-rest benchmark of the slab model against the
    /// baseline on a 26-class letter-format file.
    LetterBench {
        /// Letter-format file; first 16,000 rows train, the rest test.
        #[arg(long)]
        data: String,
        #[command(flatten)]
        kernel: KernelArgs,
        /// CSV of `class,gamma` overrides for the rbf kernel; defaults to
        /// the built-in per-class table.
        #[arg(long)]
        gamma_table: Option<String>,
        #[arg(long, default_value_t = 0.10)]
        nu1: f64,
        #[arg(long, default_value_t = 0.01)]
        nu2: f64,
        #[arg(long, default_value_t = 2.0 / 3.0)]
        epsilon: f64,
        /// Baseline outlier bound.
        #[arg(long, default_value_t = 0.1)]
        nu: f64,
        /// Boundary between the training and test partitions.
        #[arg(long, default_value_t = 16000)]
        train_rows: usize,
    },
    /// Cross-validated parameter search on one class's rows.
    GridSearch {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        target: Option<String>,
        /// Kernel families to try.
        #[arg(long, value_delimiter = ',', default_value = "rbf")]
        kernels: Vec<String>,
        /// Gamma values for rbf cells.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,2.0")]
        gammas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        nu1s: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.01")]
        nu2s: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.6666666666666666")]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
    },
    /// Per-sample KKT case labels and counts for a slab model.
    KktReport {
        #[arg(long)]
        model: String,
        /// Optional cross-check: must hold the model's training rows.
        #[arg(long)]
        data: Option<String>,
        #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
        data_format: DataFormat,
        #[arg(long, default_value = "label")]
        label_column: String,
        /// Emit one record per training sample instead of the case-count
        /// summary.
        #[arg(long)]
        per_sample: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(commands::Outcome::Done) => ExitCode::SUCCESS,
        Ok(commands::Outcome::NotConverged) => {
            eprintln!("warning: solver stopped on its iteration budget; output is best-effort");
            ExitCode::from(3)
        }
        Err(commands::CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(commands::CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
