use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod report;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "loadband", version, about = "Interval load forecasting with LSTM and Monte Carlo dropout")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for every artifact and report.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic household CSV and a two-station weather CSV.
    Generate(GenerateArgs),
    /// Fill, merge, split and normalize the input CSVs.
    Prepare(PrepareArgs),
    /// Mann-Whitney U test of train against test consumption.
    Stats,
    /// Hyperparameter search on the validation split.
    Tune(TuneArgs),
    /// Train one model.
    Train(TrainArgs),
    /// Point and interval forecasts for one split.
    Forecast(ForecastArgs),
    /// Point and interval metrics on every split.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug, Default)]
struct GenerateArgs {
    /// First hour, e.g. 2018-07-22T00:00:00 (local wall clock).
    #[arg(long)]
    start: Option<String>,
    /// Last hour, inclusive.
    #[arg(long)]
    end: Option<String>,
    #[arg(long)]
    ev_sessions_per_week: Option<f64>,
    #[arg(long)]
    missing_temp_rate: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct PrepareArgs {
    #[arg(long)]
    household: Option<PathBuf>,
    /// Weather CSV; repeat for several files.
    #[arg(long)]
    weather: Vec<PathBuf>,
    /// Drop rows from this date on (YYYY-MM-DD), or `none`.
    #[arg(long)]
    lockdown_cutoff: Option<String>,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    neurons: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    dropout: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct TuneArgs {
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct TrainArgs {
    /// Use the best configuration found by `tune`.
    #[arg(long)]
    tuned: bool,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug, Default)]
struct ForecastArgs {
    /// train, val or test.
    #[arg(long, default_value = "test")]
    split: String,
    #[arg(long)]
    passes: Option<usize>,
    /// Interval half-width in standard deviations.
    #[arg(long)]
    k: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct EvaluateArgs {
    #[arg(long)]
    passes: Option<usize>,
}

/// Failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn missing(artifact: &std::path::Path, command: &str) -> Self {
        CliError {
            code: EXIT_OTHER,
            message: format!("{} not found; run `loadband {command}` first", artifact.display()),
        }
    }
}

impl From<loadband::Error> for CliError {
    fn from(e: loadband::Error) -> Self {
        use loadband::ErrorKind;
        let code = match e.kind() {
            ErrorKind::Config => EXIT_CONFIG,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Numeric => EXIT_NUMERIC,
            ErrorKind::Io => EXIT_OTHER,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.synth.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    let parse_time = |s: &str| {
        loadband::data::csvio::parse_timestamp(s).map_err(|e| CliError::config(e.to_string()))
    };
    match &cli.command {
        Command::Generate(a) => {
            if let Some(s) = &a.start {
                cfg.synth.start = parse_time(s)?;
            }
            if let Some(s) = &a.end {
                cfg.synth.end = parse_time(s)?;
            }
            if let Some(v) = a.ev_sessions_per_week {
                cfg.synth.ev_sessions_per_week = v;
            }
            if let Some(v) = a.missing_temp_rate {
                cfg.synth.missing_temp_rate = v;
            }
        }
        Command::Prepare(a) => {
            if let Some(h) = &a.household {
                cfg.household = Some(h.clone());
            }
            if !a.weather.is_empty() {
                cfg.weather = a.weather.clone();
            }
            if let Some(c) = &a.lockdown_cutoff {
                cfg.lockdown_cutoff = c.clone();
            }
        }
        Command::Tune(a) => {
            if let Some(v) = a.budget {
                cfg.budget = v;
            }
            if let Some(v) = a.workers {
                cfg.workers = v;
            }
            if let Some(v) = a.epochs {
                cfg.epochs = v;
            }
        }
        Command::Train(a) => {
            let m = &a.model;
            if let Some(v) = m.epochs {
                cfg.epochs = v;
            }
            let p = &mut cfg.model;
            p.batch_size = m.batch_size.unwrap_or(p.batch_size);
            p.window_size = m.window.unwrap_or(p.window_size);
            p.hidden_layers = m.layers.unwrap_or(p.hidden_layers);
            p.hidden_neurons = m.neurons.unwrap_or(p.hidden_neurons);
            p.learning_rate = m.learning_rate.unwrap_or(p.learning_rate);
            p.dropout_p = m.dropout.unwrap_or(p.dropout_p);
        }
        Command::Forecast(a) => {
            if let Some(v) = a.passes {
                cfg.n_passes = v;
            }
            if let Some(v) = a.k {
                cfg.k = v;
            }
        }
        Command::Evaluate(a) => {
            if let Some(v) = a.passes {
                cfg.n_passes = v;
            }
        }
        Command::Stats => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError {
        code: EXIT_OTHER,
        message: format!("{}: {e}", cfg.out_dir.display()),
    })?;
    match &cli.command {
        Command::Generate(_) => commands::generate(&cfg),
        Command::Prepare(_) => commands::prepare(&cfg),
        Command::Stats => commands::stats(&cfg),
        Command::Tune(_) => commands::tune(&cfg),
        Command::Train(a) => commands::train(&cfg, a.tuned),
        Command::Forecast(a) => commands::forecast(&cfg, &a.split),
        Command::Evaluate(_) => commands::evaluate(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
