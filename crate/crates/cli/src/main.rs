//! `thermocast`: synthetic data, preprocessing, feature selection, model
//! training, ambient forecasting, control experiments and heating plans.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDateTime;
use clap::{Args, Parser, Subcommand};
use thermocast_core::control::PlanMode;
use thermocast_core::frame::TIMESTAMP_FORMAT;

#[derive(Debug, Parser)]
#[command(name = "thermocast", version, about = "Indoor temperature forecasting and heating control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Directory for every file a command writes.
    #[arg(long, global = true, default_value = "out")]
    pub output_dir: PathBuf,
    #[arg(long, global = true, default_value_t = 2019)]
    pub seed: u64,
    /// Column to predict.
    #[arg(long, global = true, default_value = "1-15-TMP1")]
    pub response: String,
    /// Comma-separated control columns.
    #[arg(long, global = true, value_delimiter = ',', default_value = "1-13-HTV1,1-14-TMP1,1-8-TMP1")]
    pub controls: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthOpts {
    /// House spec TOML; the bundled house-A when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_parser = parse_time, default_value = "2019-12-01 00:00:00")]
    pub start: NaiveDateTime,
    #[arg(long, value_parser = parse_time, default_value = "2019-12-31 23:59:00")]
    pub end: NaiveDateTime,
}

#[derive(Debug, Clone, Args)]
pub struct PrepareOpts {
    /// Last training timestamp.
    #[arg(long, value_parser = parse_time, default_value = "2019-12-30 14:39:00")]
    pub split: NaiveDateTime,
    /// Robust z-score beyond which a response value is an outlier.
    #[arg(long, default_value_t = 6.0)]
    pub outlier_k: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SelectOpts {
    #[arg(long, default_value_t = 15)]
    pub top_k: usize,
    #[arg(long, default_value_t = 100)]
    pub forest_trees: usize,
    /// Rows drawn per forest tree; 0 draws the full training size.
    #[arg(long, default_value_t = 5000)]
    pub max_samples: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TrainOpts {
    /// Booster grid TOML; the bundled grid when omitted.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Minimum hessian sum per child for every grid cell.
    #[arg(long, default_value_t = 1.0)]
    pub min_child_weight: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ForecastOpts {
    #[arg(long, default_value_t = 0.1)]
    pub pacf_threshold: f64,
    #[arg(long, default_value_t = 40)]
    pub max_lag: usize,
    /// Minutes to forecast past the training end.
    #[arg(long, default_value_t = 201)]
    pub horizon: usize,
    /// Re-estimate the AR coefficients at every forecast step.
    #[arg(long)]
    pub refit: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentOpts {
    /// Control cases TOML; the four bundled cases when omitted.
    #[arg(long)]
    pub cases: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlanOpts {
    /// Heating event file; the bundled event when omitted.
    #[arg(long)]
    pub event: Option<PathBuf>,
    #[arg(long, value_parser = parse_time, default_value = "2019-12-30 16:00:00")]
    pub now: NaiveDateTime,
    /// Simulation start; defaults to `--now`.
    #[arg(long, value_parser = parse_time)]
    pub t0: Option<NaiveDateTime>,
    #[arg(long, value_parser = parse_mode, default_value = "static")]
    pub mode: PlanMode,
    #[arg(long, default_value_t = 20)]
    pub hold_minutes: usize,
    #[arg(long, default_value_t = 5)]
    pub buffer_minutes: i64,
    /// Moving-average window in minutes.
    #[arg(long, default_value_t = 20)]
    pub window: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic house dataset.
    Synth {
        #[command(flatten)]
        synth: SynthOpts,
    },
    /// Resample, remove response outliers, add calendar features and split.
    Prepare {
        /// Raw sensor CSV; `<output-dir>/data.csv` when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        prepare: PrepareOpts,
    },
    /// Rank features by forest permutation importance and keep the top k.
    Select {
        /// Training CSV; `<output-dir>/train.csv` when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        select: SelectOpts,
    },
    /// Grid-search and fit the boosted indoor model.
    Train {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Feature list, one per line; `<output-dir>/features.txt` when omitted.
        #[arg(long)]
        features: Option<PathBuf>,
        #[command(flatten)]
        train: TrainOpts,
    },
    /// Fit AR models for the ambient features and forecast them.
    Forecast {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[command(flatten)]
        forecast: ForecastOpts,
    },
    /// Compare predicted trajectories with and without controls.
    Experiments {
        /// Directory holding the trained models; `--output-dir` when omitted.
        #[arg(long)]
        models: Option<PathBuf>,
        #[command(flatten)]
        experiments: ExperimentOpts,
    },
    /// Estimate the warm-up time and switch-on time for a heating event.
    Plan {
        #[arg(long)]
        models: Option<PathBuf>,
        #[command(flatten)]
        plan: PlanOpts,
    },
    /// Run every stage in order.
    All {
        /// Raw sensor CSV; synthesized when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        synth: SynthOpts,
        #[command(flatten)]
        prepare: PrepareOpts,
        #[command(flatten)]
        select: SelectOpts,
        #[command(flatten)]
        train: TrainOpts,
        #[command(flatten)]
        forecast: ForecastOpts,
        #[command(flatten)]
        experiments: ExperimentOpts,
        #[command(flatten)]
        plan: PlanOpts,
    },
}

fn parse_time(s: &str) -> Result<NaiveDateTime, String> {
    NaiveDateTime::parse_from_str(s.trim(), TIMESTAMP_FORMAT).map_err(|e| format!("expected YYYY-MM-DD HH:MM:SS: {e}"))
}

fn parse_mode(s: &str) -> Result<PlanMode, String> {
    s.parse().map_err(|e: thermocast_core::Error| e.to_string())
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let c = &cli.common;
    std::fs::create_dir_all(&c.output_dir)?;
    match cli.command {
        Command::Synth { synth } => commands::synth(c, &synth),
        Command::Prepare { input, prepare } => commands::prepare(c, input.as_deref(), &prepare),
        Command::Select { input, select } => commands::select(c, input.as_deref(), &select),
        Command::Train { input, features, train } => commands::train(c, input.as_deref(), features.as_deref(), &train),
        Command::Forecast { input, features, forecast } => commands::forecast(c, input.as_deref(), features.as_deref(), &forecast),
        Command::Experiments { models, experiments } => commands::experiments(c, models.as_deref(), &experiments),
        Command::Plan { models, plan } => commands::plan(c, models.as_deref(), &plan),
        Command::All {
            input,
            synth,
            prepare,
            select,
            train,
            forecast,
            experiments,
            plan,
        } => {
            let raw = match input {
                Some(p) => p,
                None => {
                    commands::synth(c, &synth)?;
                    c.output_dir.join(commands::DATA_CSV)
                }
            };
            commands::prepare(c, Some(&raw), &prepare)?;
            commands::select(c, None, &select)?;
            commands::train(c, None, None, &train)?;
            commands::forecast(c, None, None, &forecast)?;
            commands::experiments(c, None, &experiments)?;
            commands::plan(c, None, &plan)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<thermocast_core::Error>().map_or("error", |e| e.kind());
            let mut parts = Vec::new();
            for cause in e.chain() {
                parts.push(cause.to_string());
                if cause.is::<thermocast_core::Error>() {
                    break;
                }
            }
            let message = parts.join(": ").replace('\n', " ");
            eprintln!("{}", error_line(kind, &message));
            ExitCode::FAILURE
        }
    }
}
