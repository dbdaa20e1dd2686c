//! `topocausal` command-line driver.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Preset, RunConfig, DATA_DIR_ENV};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("fetch failed for {0}")]
    Fetch(String),
    #[error(transparent)]
    Core(#[from] topocausal::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        use topocausal::Error as E;
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } => 3,
            Self::Fetch(_) => 6,
            Self::Core(e) => match e {
                E::Io { .. } | E::Parse { .. } | E::InvalidRow { .. } | E::Csv(_) | E::Json(_) => 3,
                E::Validation(_) => 3,
                E::Alignment(_) | E::InsufficientData { .. } | E::Coverage { .. } => 4,
                E::DegenerateRegression(_) | E::SingularDesign { .. } => 5,
            },
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "topocausal", version, about = "Topological crash detection and Granger-causality networks for price panels")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// JSON run configuration; missing fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in instrument groups used when no config file is given.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Sliding window length in trading days.
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Wasserstein degree; repeat for several.
    #[arg(long, global = true)]
    degree: Vec<f64>,
    /// Significance level for unit-root and Granger tests.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// `label:YYYY-MM-DD:YYYY-MM-DD`, half-open; repeat for several.
    #[arg(long, global = true)]
    period: Vec<String>,
    /// Largest lag considered by FPE selection.
    #[arg(long = "max-lag", global = true)]
    max_lag: Option<usize>,
    /// Output root; results go to `<out>/<config hash prefix>/`.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for synthetic data.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load (optionally download) prices, align them and write price and return tables.
    Ingest {
        /// Download every configured symbol into the data directory first.
        #[arg(long)]
        fetch: bool,
    },
    /// Wasserstein distance of each window diagram to the diagonal, per group.
    Wdseries,
    /// Window-by-window distance between the diagrams of two groups.
    Compare {
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// ADF and Phillips-Perron tests per series, period and differencing order.
    Stationarity,
    /// Pairwise Granger tests between group series for every period.
    Causality,
    /// Causality networks as DOT and JSON.
    Network,
    /// Everything above plus plots and run metadata.
    Report,
    /// Write a synthetic crash data set and a matching config into `--out`.
    Synth,
}

fn resolve_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match (&args.config, args.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(p)) => RunConfig::preset(p),
        (None, None) => RunConfig::default(),
    };
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        cfg.data_dir = PathBuf::from(dir);
    }
    if let Some(w) = args.window {
        cfg.window = w;
    }
    if let Some(s) = args.stride {
        cfg.stride = s;
    }
    if !args.degree.is_empty() {
        cfg.degrees = args.degree.clone();
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if !args.period.is_empty() {
        cfg.periods = args
            .period
            .iter()
            .map(|p| topocausal::network::PeriodSpec::parse(p))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if args.max_lag.is_some() {
        cfg.max_lag = args.max_lag;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Synth = cli.command {
        return commands::synth(&cli.common.out, cli.common.seed, cli.common.window);
    }
    let cfg = resolve_config(&cli.common)?;
    let ctx = commands::Context::new(cfg, &cli.common.out)?;
    match cli.command {
        Command::Ingest { fetch } => ctx.ingest(fetch),
        Command::Wdseries => ctx.wdseries().map(|_| ()),
        Command::Compare { a, b } => ctx.compare(a.as_deref(), b.as_deref()),
        Command::Stationarity => ctx.stationarity(),
        Command::Causality => ctx.causality().map(|_| ()),
        Command::Network => ctx.network(),
        Command::Report => ctx.report(),
        Command::Synth => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
