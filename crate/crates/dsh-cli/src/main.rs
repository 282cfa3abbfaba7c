//! `dsh-sim`: command-line runner for the harmonization simulator.
//!
//! * `run` — simulate one scenario; writes `<mode>_trace.csv` and
//!   `<mode>_metrics.json` (plus `<mode>_plot.svg` with `--plot`) to the
//!   output directory and prints the metrics JSON on stdout.
//! * `compare` — simulate the scenario under every mode; writes the same
//!   per-mode artifacts plus `summary.csv` (and `compare.svg` with
//!   `--plot`) and prints the summary on stdout.
//! * `encode` — print the scenario's advisory frame as lowercase hex.
//! * `decode` — decode a hex frame (argument or stdin) and print it as JSON.
//!
//! Exit codes: `1` for configuration, scenario, or frame errors; `2` when a
//! simulation times out; `3` when an artifact cannot be written.

mod chart;

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use dsh_core::engine::{compare_modes, run_scenario, ModeRun, SimTrace};
use dsh_core::scenario::{load_scenario, Mode, ScenarioConfig};
use dsh_core::v2x::{decode as decode_frame, encode as encode_frame, QueueAdvisoryMessage};

#[derive(Parser)]
#[command(
    name = "dsh-sim",
    version,
    about = "Deterministic dynamic speed harmonization simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its trace and metrics.
    Run(RunArgs),
    /// Simulate the scenario under every mode and write a summary.
    Compare(CompareArgs),
    /// Print the scenario's advisory frame as lowercase hex.
    Encode(EncodeArgs),
    /// Decode an advisory frame from hex (argument or stdin) to JSON.
    Decode(DecodeArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Directory artifacts are written into (created if missing).
    #[arg(long, env = "DSH_SIM_OUT", default_value = "out", value_name = "DIR")]
    out: PathBuf,
    /// Also write an SVG plot of the run.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config file.
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Override the scenario's mode
    /// (no-dsh | step | step-sigmoid | single-sigmoid).
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,
    /// Override the scenario's integration step, seconds.
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    #[command(flatten)]
    io: OutArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Scenario config file.
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Override the scenario's integration step, seconds.
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    #[command(flatten)]
    io: OutArgs,
}

#[derive(Args)]
struct EncodeArgs {
    /// Scenario config file whose advisory is encoded.
    #[arg(long, value_name = "FILE")]
    scenario: PathBuf,
    /// Broadcast sequence number stamped into the frame.
    #[arg(long, default_value_t = 1, value_name = "N")]
    msg_id: u32,
    /// Timestamp stamped into the frame, milliseconds.
    #[arg(long, default_value_t = 0, value_name = "MS")]
    timestamp_ms: u64,
}

#[derive(Args)]
struct DecodeArgs {
    /// Hex-encoded frame; read from stdin when omitted.
    #[arg(value_name = "HEX")]
    hex: Option<String>,
}

/// Failure classes and their process exit codes.
enum CliError {
    /// Bad scenario, flag, or frame contents: exit 1.
    Config(String),
    /// The simulation hit its wall-clock guard: exit 2.
    Timeout(String),
    /// An artifact could not be written: exit 3.
    Artifact(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Timeout(_) => 2,
            CliError::Artifact(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Timeout(m) | CliError::Artifact(m) => m,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
    }
}

fn load_with_overrides(
    path: &Path,
    mode: Option<&str>,
    dt: Option<f64>,
) -> Result<ScenarioConfig, CliError> {
    let mut cfg = load_scenario(path).map_err(config_err)?;
    if let Some(mode) = mode {
        cfg.mode = Mode::from_str(mode).map_err(config_err)?;
    }
    if let Some(dt) = dt {
        cfg.dt = dt;
    }
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn write_artifact(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Artifact(format!("writing {}: {e}", path.display())))
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Artifact(format!("creating {}: {e}", dir.display())))
}

fn write_mode_artifacts(
    out: &Path,
    mode: Mode,
    trace: &SimTrace,
    metrics_json: &str,
) -> Result<(), CliError> {
    write_artifact(&out.join(format!("{mode}_trace.csv")), &trace.to_csv())?;
    write_artifact(
        &out.join(format!("{mode}_metrics.json")),
        &format!("{metrics_json}\n"),
    )
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let cfg = load_with_overrides(&args.scenario, args.mode.as_deref(), args.dt)?;
    let (trace, metrics) = run_scenario(&cfg).map_err(|e| CliError::Timeout(e.to_string()))?;
    ensure_out_dir(&args.io.out)?;
    let metrics_json = metrics.to_json();
    write_mode_artifacts(&args.io.out, cfg.mode, &trace, &metrics_json)?;
    if args.io.plot {
        let svg = plot_run(&cfg, &trace);
        write_artifact(&args.io.out.join(format!("{}_plot.svg", cfg.mode)), &svg)?;
    }
    println!("{metrics_json}");
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let cfg = load_with_overrides(&args.scenario, None, args.dt)?;
    let runs = compare_modes(&cfg).map_err(|e| CliError::Timeout(e.to_string()))?;
    ensure_out_dir(&args.io.out)?;
    for run in &runs {
        write_mode_artifacts(&args.io.out, run.mode, &run.trace, &run.metrics.to_json())?;
    }
    let summary = summary_csv(&runs);
    write_artifact(&args.io.out.join("summary.csv"), &summary)?;
    if args.io.plot {
        write_artifact(&args.io.out.join("compare.svg"), &plot_compare(&cfg, &runs))?;
    }
    print!("{summary}");
    Ok(())
}

fn cmd_encode(args: EncodeArgs) -> Result<(), CliError> {
    let cfg = load_scenario(&args.scenario).map_err(config_err)?;
    let msg = QueueAdvisoryMessage::from_advisory(args.msg_id, args.timestamp_ms, &cfg.advisory)
        .map_err(config_err)?;
    println!("{}", hex::encode(encode_frame(&msg)));
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> Result<(), CliError> {
    let text = match args.hex {
        Some(hex) => hex,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Config(format!("reading stdin: {e}")))?;
            buf
        }
    };
    let compact: String = text.split_whitespace().collect();
    let bytes = hex::decode(&compact).map_err(|e| CliError::Config(format!("invalid hex: {e}")))?;
    let msg = decode_frame(&bytes).map_err(config_err)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&msg).expect("advisory message serializes")
    );
    Ok(())
}

fn summary_csv(runs: &[ModeRun]) -> String {
    let mut out = String::from("mode,peak_decel,rms_jerk,travel_time,fuel_total,tracking_rmse\n");
    for run in runs {
        let m = &run.metrics;
        out.push_str(&format!(
            "{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}\n",
            run.mode, m.peak_decel, m.rms_jerk, m.travel_time, m.fuel_total, m.tracking_rmse
        ));
    }
    out
}

fn latch_marker(trace: &SimTrace) -> Option<(f64, String)> {
    trace
        .samples
        .iter()
        .find(|s| s.advisory_delivered)
        .map(|s| (s.distance, "latch".to_string()))
}

fn speed_panels(
    cfg: &ScenarioConfig,
    mode: Mode,
    trace: &SimTrace,
    y_range: Option<(f64, f64)>,
) -> chart::Panel {
    chart::Panel {
        title: mode.to_string(),
        x_label: "distance (m)".into(),
        y_label: "speed (m/s)".into(),
        series: vec![
            chart::Series {
                label: "speed".into(),
                color: chart::PALETTE[0],
                points: trace
                    .samples
                    .iter()
                    .map(|s| (s.distance, s.speed))
                    .collect(),
            },
            chart::Series {
                label: "reference".into(),
                color: chart::PALETTE[1],
                points: trace
                    .samples
                    .iter()
                    .map(|s| (s.distance, s.v_ref))
                    .collect(),
            },
        ],
        band: Some((cfg.advisory.queue_start, cfg.advisory.queue_end)),
        marker: latch_marker(trace),
        y_range,
    }
}

fn plot_run(cfg: &ScenarioConfig, trace: &SimTrace) -> String {
    let accel_panel = chart::Panel {
        title: "acceleration".into(),
        x_label: "distance (m)".into(),
        y_label: "accel (m/s^2)".into(),
        series: vec![chart::Series {
            label: "accel".into(),
            color: chart::PALETTE[2],
            points: trace
                .samples
                .iter()
                .map(|s| (s.distance, s.accel))
                .collect(),
        }],
        band: Some((cfg.advisory.queue_start, cfg.advisory.queue_end)),
        marker: latch_marker(trace),
        y_range: None,
    };
    let panels = [speed_panels(cfg, cfg.mode, trace, None), accel_panel];
    chart::render(&format!("dsh-sim run: {}", cfg.mode), &panels, 2)
}

fn plot_compare(cfg: &ScenarioConfig, runs: &[ModeRun]) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for run in runs {
        for s in &run.trace.samples {
            lo = lo.min(s.speed.min(s.v_ref));
            hi = hi.max(s.speed.max(s.v_ref));
        }
    }
    let pad = 0.05 * (hi - lo).max(1e-9);
    let shared = Some((lo - pad, hi + pad));
    let panels: Vec<chart::Panel> = runs
        .iter()
        .map(|run| speed_panels(cfg, run.mode, &run.trace, shared))
        .collect();
    chart::render("dsh-sim compare: speed vs distance", &panels, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsh_core::engine::MetricsReport;

    fn fake_run(mode: Mode) -> ModeRun {
        ModeRun {
            mode,
            trace: SimTrace {
                dt: 0.01,
                samples: Vec::new(),
            },
            metrics: MetricsReport {
                peak_decel: 1.0,
                rms_jerk: 2.0,
                travel_time: 3.0,
                fuel_total: 4.0,
                tracking_rmse: 5.0,
            },
        }
    }

    #[test]
    fn summary_lists_modes_in_presentation_order() {
        let runs: Vec<ModeRun> = Mode::ALL.into_iter().map(fake_run).collect();
        let summary = summary_csv(&runs);
        let lines: Vec<&str> = summary.lines().collect();
        assert_eq!(
            lines[0],
            "mode,peak_decel,rms_jerk,travel_time,fuel_total,tracking_rmse"
        );
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("no-dsh,"));
        assert!(lines[2].starts_with("step,"));
        assert!(lines[3].starts_with("single-sigmoid,"));
        assert!(lines[4].starts_with("step-sigmoid,"));
        assert!(lines[1].contains("1.00000000e0,2.00000000e0"));
    }

    #[test]
    fn error_classes_map_to_documented_exit_codes() {
        assert_eq!(CliError::Config("x".into()).code(), 1);
        assert_eq!(CliError::Timeout("x".into()).code(), 2);
        assert_eq!(CliError::Artifact("x".into()).code(), 3);
    }
}
