use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use forage_core::config::{Condition, PilotKind, SessionConfig};
use forage_core::replay::{replay, ReplayVerdict};
use forage_core::telemetry::{
    aggregate_by_position, aggregate_scores, export_series, series_to_csv, OrientationMap, ScoreSplit,
    TelemetryLog,
};
use forage_core::{run_block, Error};
use forage_live::ServeOptions;
use log::info;
use serde_json::json;

/// Headless foraging experiments with a pilot and an optional copilot.
#[derive(Parser)]
#[command(name = "forage", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one block with a simulated pilot and write its JSONL log.
    Run(RunArgs),
    /// Summarise a log: day/night and position totals per trial.
    Aggregate(AggregateArgs),
    /// Re-simulate a log and check it record by record.
    Replay(ReplayArgs),
    /// Serve a live session to one pilot over WebSocket.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Nocp,
    Pav,
    Bandit,
}

impl From<ConditionArg> for Condition {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::Nocp => Condition::NoCp,
            ConditionArg::Pav => Condition::Pav,
            ConditionArg::Bandit => Condition::Bandit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PilotArg {
    Learning,
    Cuefollower,
    Random,
}

impl From<PilotArg> for PilotKind {
    fn from(p: PilotArg) -> Self {
        match p {
            PilotArg::Learning => PilotKind::Learning,
            PilotArg::Cuefollower => PilotKind::CueFollower,
            PilotArg::Random => PilotKind::Random,
        }
    }
}

#[derive(clap::Args)]
struct RunArgs {
    /// Copilot condition. Overrides the config file when given.
    #[arg(long, value_enum, default_value = "pav")]
    condition: ConditionArg,
    /// Simulated pilot. Overrides the config file when given.
    #[arg(long, value_enum, default_value = "learning")]
    pilot: PilotArg,
    /// Trials in the block.
    #[arg(long, default_value_t = 3)]
    trials: u32,
    /// Trial length in seconds.
    #[arg(long, default_value_t = 180.0)]
    duration: f64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Block index, mixed into every trial seed.
    #[arg(long, default_value_t = 0)]
    block: u32,
    /// Output log.
    #[arg(long, default_value = "forage.jsonl")]
    out: PathBuf,
    /// JSON session config; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct AggregateArgs {
    /// Log to summarise.
    #[arg(long)]
    log: PathBuf,
    /// Slot-to-position map, e.g. F,M,B,B,M,F. Defaults to the one in the log header.
    #[arg(long)]
    orientation: Option<String>,
    /// Also write the per-tick time series as long-format CSV.
    #[arg(long)]
    series_csv: Option<PathBuf>,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(clap::Args)]
struct ReplayArgs {
    /// Log to verify.
    #[arg(long)]
    log: PathBuf,
    /// Config to replay under instead of the one in the log header.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ServeArgs {
    /// TCP port for the WebSocket endpoint (/ws).
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// JSON session config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Where the session log is written.
    #[arg(long, default_value = "live.jsonl")]
    out: PathBuf,
    /// Wall-clock speed-up; 1 is real time.
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_SCHEMA: u8 = 3;
const EXIT_FAILURE: u8 = 4;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FORAGE_LOG_LEVEL", "warn")).init();
    let matches = Cli::command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let sub = matches.subcommand().map(|(_, m)| m).expect("subcommand is required");
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(&args, sub),
        Command::Aggregate(args) => cmd_aggregate(&args),
        Command::Replay(args) => cmd_replay(&args),
        Command::Serve(args) => cmd_serve(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let schema = e
                .chain()
                .any(|cause| matches!(cause.downcast_ref::<Error>(), Some(Error::SchemaMismatch { .. })));
            ExitCode::from(if schema { EXIT_SCHEMA } else { EXIT_FAILURE })
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<SessionConfig> {
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SessionConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))
        }
        None => Ok(SessionConfig::default()),
    }
}

fn read_log(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// A flag overrides the config file only when typed on the command line,
/// or when there is no config file at all.
fn given(matches: &ArgMatches, id: &str, have_file: bool) -> bool {
    !have_file || matches.value_source(id) == Some(ValueSource::CommandLine)
}

fn cmd_run(args: &RunArgs, matches: &ArgMatches) -> Result<ExitCode> {
    let mut config = load_config(args.config.as_deref())?;
    let file = args.config.is_some();
    if given(matches, "condition", file) {
        config.condition = args.condition.into();
    }
    if given(matches, "pilot", file) {
        config.pilot.kind = args.pilot.into();
    }
    if given(matches, "trials", file) {
        config.trials_per_block = args.trials;
    }
    if given(matches, "duration", file) {
        config.trial_duration = args.duration;
    }
    if given(matches, "seed", file) {
        config.seed = args.seed;
    }
    if given(matches, "block", file) {
        config.block = args.block;
    }
    if config.pilot.kind == PilotKind::Live {
        anyhow::bail!("a live pilot needs `forage serve`");
    }

    let block = run_block(&config)?;
    std::fs::write(&args.out, block.to_jsonl()).with_context(|| format!("writing {}", args.out.display()))?;
    info!("wrote {}", args.out.display());

    println!(
        "condition {}  pilot {}  seed {}  block {}",
        config.condition.name(),
        config.pilot.kind.name(),
        config.seed,
        config.block
    );
    print_table(block.trials.iter().map(|t| (t.trial, t.scores)), &block.scores());
    println!("log: {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn print_table(rows: impl Iterator<Item = (u32, ScoreSplit)>, total: &ScoreSplit) {
    println!(
        "{:>6} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "trial", "score", "day", "night", "day+", "night+"
    );
    let line = |label: String, s: &ScoreSplit| {
        println!(
            "{:>6} {:>7} {:>7} {:>7} {:>7} {:>7}",
            label,
            s.total(),
            s.day_total,
            s.night_total,
            s.day_plus,
            s.night_plus
        )
    };
    for (trial, split) in rows {
        line(trial.to_string(), &split);
    }
    line("all".to_string(), total);
}

fn cmd_aggregate(args: &AggregateArgs) -> Result<ExitCode> {
    let log = TelemetryLog::parse(&read_log(&args.log)?)?;
    let map = match &args.orientation {
        Some(text) => OrientationMap::parse(text)?,
        None => log.header.config.orientation.clone(),
    };

    let mut total = ScoreSplit::default();
    let mut trials = Vec::new();
    for records in log.trials() {
        let split = aggregate_scores(records);
        let positions = aggregate_by_position(records, &map)?;
        total.add(&split);
        trials.push((records[0].trial, split, positions));
    }
    let positions = aggregate_by_position(&log.records, &map)?;

    if let Some(path) = &args.series_csv {
        let csv = series_to_csv(&export_series(&log.records));
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }

    if args.json {
        let report = json!({
            "condition": log.header.config.condition,
            "seed": log.header.seed,
            "trials": trials.iter().map(|(trial, split, pos)| json!({
                "trial": trial,
                "score": split.total(),
                "scores": split,
                "positions": pos,
            })).collect::<Vec<_>>(),
            "total": total,
            "positions": positions,
        });
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print_table(trials.iter().map(|(trial, split, _)| (*trial, *split)), &total);
        println!(
            "positions  front {}  middle {}  back {}",
            positions.front, positions.middle, positions.back
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_replay(args: &ReplayArgs) -> Result<ExitCode> {
    let text = read_log(&args.log)?;
    let config = args.config.as_deref().map(|p| load_config(Some(p))).transpose()?;
    match replay(&text, config.as_ref())? {
        ReplayVerdict::Match { records } => {
            println!("MATCH ({records} records)");
            Ok(ExitCode::SUCCESS)
        }
        ReplayVerdict::Mismatch {
            line,
            expected,
            found,
            first_event_line,
        } => {
            println!("MISMATCH at line {line}");
            println!("  expected: {}", expected.as_deref().unwrap_or("<end of log>"));
            println!("  found:    {}", found.as_deref().unwrap_or("<end of log>"));
            if let Some(event_line) = first_event_line {
                println!("  first divergent event at line {event_line}");
            }
            Ok(ExitCode::from(EXIT_MISMATCH))
        }
    }
}

fn cmd_serve(args: &ServeArgs) -> Result<ExitCode> {
    let config = load_config(args.config.as_deref())?;
    anyhow::ensure!(args.speed > 0.0, "--speed must be positive");
    let options = ServeOptions {
        port: args.port,
        log_path: args.out.clone(),
        speed: args.speed,
    };
    eprintln!("serving ws://0.0.0.0:{}/ws, log {}", args.port, args.out.display());
    forage_live::serve_blocking(config, options)?;
    Ok(ExitCode::SUCCESS)
}
