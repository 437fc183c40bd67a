use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use divetrack::harness::{self, TrackerKind};
use divetrack::marker_tracker::Mode;
use divetrack::simworld::{self, Scenario, PRESET_NAMES, SCENARIO_KEYS};
use divetrack::Error;
use serde_json::{json, Value};

/// Diver tracking toolkit: simulate dives, run the marker and hybrid
/// trackers, and evaluate them against ground truth.
///
/// Every command prints one JSON object on stdout. Failures print a single
/// `{"status":"error",...}` line on stderr and exit non-zero.
#[derive(Parser, Debug)]
#[command(name = "divetrack", version, after_help = SCENARIO_KEYS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate truth and all sensor streams for a scenario.
    #[command(after_help = SCENARIO_KEYS)]
    Simulate {
        /// Preset name (baiae-square, marker-lab) or path to a scenario TOML file.
        scenario: String,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory to create.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a tracker over a simulated run directory; writes estimate.csv.
    Track {
        #[arg(value_enum)]
        tracker: TrackerArg,
        /// Run directory written by `simulate`.
        #[arg(long = "in")]
        input: PathBuf,
        /// marker: raw = detections only, fused = ESKF with IMU.
        /// hybrid: raw = acoustic fixes only, fused = fixes plus VIO gap filling.
        #[arg(long, value_enum, default_value = "fused")]
        mode: ModeArg,
    },
    /// Compare estimate.csv with truth.csv; writes metrics.json, errors.csv and plots.
    Evaluate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run a bundled experiment end to end and write its metrics and plots.
    Reproduce {
        #[arg(value_enum)]
        experiment: Experiment,
        /// Output directory (default: `./reproduce-<experiment>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of seeds for marker-lab.
        #[arg(long, default_value_t = 20)]
        seeds: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TrackerArg {
    Marker,
    Hybrid,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Raw,
    Fused,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Experiment {
    BaiaeSquare,
    MarkerLab,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::BaiaeSquare => "baiae-square",
            Experiment::MarkerLab => "marker-lab",
        }
    }
}

fn load_scenario(arg: &str) -> anyhow::Result<Scenario> {
    if PRESET_NAMES.contains(&arg) {
        return Ok(simworld::preset(arg).map_err(Error::from)?);
    }
    let path = Path::new(arg);
    if !path.is_file() {
        bail!(
            "`{arg}` is neither a preset ({}) nor a scenario file",
            PRESET_NAMES.join(", ")
        );
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Scenario::from_toml(&text).map_err(Error::from)?)
}

fn simulate(scenario: &str, seed: Option<u64>, out: &Path) -> anyhow::Result<Value> {
    let mut scenario = load_scenario(scenario)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let sim = simworld::simulate(&scenario).map_err(Error::from)?;
    harness::write_streams(out, &sim.scenario, &sim.truth, &sim.streams)?;
    let s = &sim.streams;
    Ok(json!({
        "status": "ok",
        "command": "simulate",
        "scenario": scenario.name,
        "seed": scenario.seed,
        "out": out.display().to_string(),
        "duration_s": sim.truth.duration(),
        "rows": {
            "truth": sim.truth.len(),
            "imu": s.imu.len(),
            "markers": s.markers.len(),
            "acoustic": s.acoustic.len(),
            "depth": s.depth.len(),
            "vio": s.vio.len(),
        },
    }))
}

fn track(tracker: TrackerArg, input: &Path, mode: ModeArg) -> anyhow::Result<Value> {
    let log = harness::read_run_log(input)?;
    let scenario = log
        .scenario
        .as_ref()
        .with_context(|| format!("{} has no {}", input.display(), harness::files::SCENARIO))?;
    let kind = match tracker {
        TrackerArg::Marker => TrackerKind::Marker,
        TrackerArg::Hybrid => TrackerKind::Hybrid,
    };
    let mode = match mode {
        ModeArg::Raw => Mode::Raw,
        ModeArg::Fused => Mode::Fused,
    };
    let out = harness::run_tracker(scenario, &log.streams, kind, mode)?;
    harness::write_estimate(input, &out.trajectory, out.sources.as_deref(), &out.info)?;
    Ok(json!({
        "status": "ok",
        "command": "track",
        "tracker": kind,
        "mode": mode,
        "samples": out.trajectory.len(),
        "counts": out.info.counts,
    }))
}

fn evaluate(input: &Path) -> anyhow::Result<Value> {
    let mut log = harness::read_run_log(input)?;
    let metrics = harness::finish_run(input, &mut log)?;
    Ok(json!({
        "status": "ok",
        "command": "evaluate",
        "metrics": metrics.summary_json(),
    }))
}

fn reproduce(experiment: Experiment, out: Option<PathBuf>, seeds: usize) -> anyhow::Result<Value> {
    let out = out.unwrap_or_else(|| PathBuf::from(format!("reproduce-{}", experiment.name())));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let scenario = simworld::preset(experiment.name()).map_err(Error::from)?;
    let report = match experiment {
        Experiment::MarkerLab => {
            if seeds == 0 {
                bail!("--seeds must be at least 1");
            }
            serde_json::to_value(harness::reproduce_marker_lab(&scenario, seeds, Some(&out))?)?
        }
        Experiment::BaiaeSquare => serde_json::to_value(harness::reproduce_baiae_square(&scenario, Some(&out))?.0)?,
    };
    Ok(json!({
        "status": "ok",
        "command": "reproduce",
        "experiment": experiment.name(),
        "out": out.display().to_string(),
        "report": report,
    }))
}

/// The error and its causes, skipping causes already quoted by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut message = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !message.contains(&text) {
            if !message.is_empty() {
                message.push_str(": ");
            }
            message.push_str(&text);
        }
    }
    message
}

fn error_line(kind: &str, message: &str) -> String {
    json!({ "status": "error", "kind": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", error_line("usage", first.trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Simulate { scenario, seed, out } => simulate(&scenario, seed, &out),
        Command::Track { tracker, input, mode } => track(tracker, &input, mode),
        Command::Evaluate { input } => evaluate(&input),
        Command::Reproduce { experiment, out, seeds } => reproduce(experiment, out, seeds),
    };
    match result {
        Ok(value) => {
            use std::io::Write;
            // A closed pipe downstream is not a failure of the command.
            let _ = writeln!(std::io::stdout(), "{value}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = e.downcast_ref::<Error>().map_or("cli", |e| e.kind());
            eprintln!("{}", error_line(kind, &describe(&e)));
            ExitCode::FAILURE
        }
    }
}
