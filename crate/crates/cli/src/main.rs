mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

pub const THREADS_ENV: &str = "MODESENSE_THREADS";

/// Transportation-mode recognition from smartphone motion sensors.
#[derive(Parser)]
#[command(name = "modesense", version)]
struct Cli {
    /// Worker threads; `1` runs fully serially. Defaults to $MODESENSE_THREADS,
    /// then to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Flat `key = value` config file.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set knn_k=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Top-level seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MatrixIn {
    /// Feature matrix CSV written by `extract`.
    #[arg(long)]
    matrix: PathBuf,
    /// Restrict to time, freq or pooled features.
    #[arg(long)]
    domain: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize labelled traces: one CSV per trace plus manifest.json.
    Generate {
        #[arg(long)]
        out: PathBuf,
        /// Seconds per mode.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Window and featurize traces into a matrix CSV.
    Extract {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        domain: Option<String>,
    },
    /// Rank features for every task and keep the top subset.
    Select {
        #[command(flatten)]
        input: MatrixIn,
        /// Directory for rankings.csv and subsets.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the two-layer model on every row and write a bundle directory.
    Train {
        #[command(flatten)]
        input: MatrixIn,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate and write the report.
    Evaluate {
        #[command(flatten)]
        input: MatrixIn,
        /// Report JSON.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        algorithm: Option<String>,
        #[arg(long)]
        framework: Option<String>,
        /// Aligned text tables.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Per-window CSV of truth, top two and prediction.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Cross-validate once per value of a hyperparameter.
    Sweep {
        #[command(flatten)]
        input: MatrixIn,
        /// knn_k, cart_pruning or rf_trees.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values; the axis default range otherwise.
        #[arg(long)]
        values: Option<String>,
        #[arg(long)]
        algorithm: Option<String>,
        #[arg(long)]
        framework: Option<String>,
        /// Sweep JSON.
        #[arg(long)]
        out: PathBuf,
        /// `value,mean_accuracy,fold_1..fold_k` for plotting.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Estimate whether the second layer pays off on a validation matrix.
    Benefit {
        /// Bundle directory written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

pub enum Failure {
    Usage(String),
    Core(modesense_core::Error),
}

impl From<modesense_core::Error> for Failure {
    fn from(e: modesense_core::Error) -> Self {
        Failure::Core(e)
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    for pair in &cli.overrides {
        cfg.set_pair(pair)?;
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    let flags: Vec<(&str, Option<String>)> = match &cli.command {
        Command::Generate { duration, .. } => vec![("duration_s", duration.map(|d| d.to_string()))],
        Command::Extract { domain, .. } => vec![("domain", domain.clone())],
        Command::Select { input, .. } | Command::Train { input, .. } => {
            vec![("domain", input.domain.clone())]
        }
        Command::Evaluate {
            input,
            algorithm,
            framework,
            ..
        } => vec![
            ("domain", input.domain.clone()),
            ("algorithm", algorithm.clone()),
            ("framework", framework.clone()),
        ],
        Command::Sweep {
            input,
            axis,
            values,
            algorithm,
            framework,
            ..
        } => vec![
            ("domain", input.domain.clone()),
            ("axis", axis.clone()),
            ("values", values.clone()),
            ("algorithm", algorithm.clone()),
            ("framework", framework.clone()),
        ],
        Command::Benefit { .. } => Vec::new(),
    };
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    Ok(cfg)
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{THREADS_ENV}: `{v}` is not a thread count")),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = build_config(&cli).map_err(Failure::Usage)?;
    if let Some(n) = thread_count(cli.threads).map_err(Failure::Usage)? {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Generate { out, .. } => commands::generate(&cfg, &out),
        Command::Extract { traces, out, .. } => commands::extract(&cfg, &traces, &out),
        Command::Select { input, out } => commands::select(&cfg, &input.matrix, &out),
        Command::Train { input, out } => commands::train(&cfg, &input.matrix, &out),
        Command::Evaluate {
            input,
            out,
            table,
            records,
            ..
        } => commands::evaluate(&cfg, &input.matrix, &out, table.as_deref(), records.as_deref()),
        Command::Sweep { input, out, csv, .. } => {
            commands::sweep(&cfg, &input.matrix, &out, csv.as_deref())
        }
        Command::Benefit { model, matrix, out } => commands::benefit(&cfg, &model, &matrix, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            if is_input_error(&e) {
                ExitCode::from(3)
            } else {
                ExitCode::from(4)
            }
        }
    }
}

fn is_input_error(e: &modesense_core::Error) -> bool {
    match e {
        modesense_core::Error::Fold { source, .. } => is_input_error(source),
        e => e.is_format_error(),
    }
}
