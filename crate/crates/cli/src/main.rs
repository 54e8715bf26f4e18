//! `thermogauge simulate|verify|sweep --config <path> [--seed <u64>]
//! [--no-timestamp]`
//!
//! Exit codes: 0 success, 1 property-suite failure (verify), 2 config
//! error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use thermogauge::config::{Mode, RunConfig};
use thermogauge::pipeline::{run_record, RunError};
use thermogauge::report::{
    series_csv, sweep_csv_header, sweep_csv_row, write_atomic, PartitionJson, Report,
    ThermoRecordJson,
};
use thermogauge::suites::run_verify;

#[derive(Parser)]
#[command(name = "thermogauge", version, about = "Gauge-invariant quantum thermodynamics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble the configured trajectory and write the report and series CSV.
    Simulate(RunArgs),
    /// Run every property suite and write the suite report; exit 1 on failure.
    Verify(RunArgs),
    /// Re-run the simulation once per sweep value and write one CSV row each.
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the run configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Omit the timestamp field so reports are byte-reproducible.
    #[arg(long)]
    no_timestamp: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate(args) => dispatch(&args, Mode::Simulate, run_simulate),
        Command::Verify(args) => dispatch(&args, Mode::Verify, run_verify_command),
        Command::Sweep(args) => dispatch(&args, Mode::Sweep, run_sweep),
    };
    ExitCode::from(code)
}

fn dispatch(
    args: &RunArgs,
    expected_mode: Mode,
    run: fn(&RunConfig, &RunArgs) -> Result<u8, RunError>,
) -> u8 {
    let config = match load_config(args, expected_mode) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {}", e.message());
            return 2;
        }
    };
    match run(&config, args) {
        Ok(code) => code,
        Err(e) => {
            let label = match e {
                RunError::Config(_) => "config error",
                RunError::Numerical(_) => "numerical failure",
            };
            eprintln!("{label}: {}", e.message());
            e.exit_code() as u8
        }
    }
}

fn load_config(args: &RunArgs, expected_mode: Mode) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        RunError::Config(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let mut config = RunConfig::from_json(&text).map_err(RunError::from)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if config.mode != expected_mode {
        return Err(RunError::Config(format!(
            "config mode is `{}` but the `{expected_mode}` subcommand was invoked",
            config.mode
        )));
    }
    Ok(config)
}

fn report_path(config: &RunConfig) -> PathBuf {
    config
        .outputs
        .report_path
        .as_deref()
        .unwrap_or("report.json")
        .into()
}

fn csv_path(config: &RunConfig) -> PathBuf {
    config
        .outputs
        .csv_path
        .as_deref()
        .unwrap_or("series.csv")
        .into()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    write_atomic(path, bytes)
        .map_err(|e| RunError::Config(format!("cannot write {}: {e}", path.display())))
}

fn run_simulate(config: &RunConfig, args: &RunArgs) -> Result<u8, RunError> {
    let (traj, record) = run_record(config)?;
    let mut report = Report::new(config, !args.no_timestamp);
    report.thermo_record = Some(ThermoRecordJson::from(&record));
    report.partition = Some(PartitionJson::from(traj.partition()));
    write_file(&report_path(config), report.to_json().as_bytes())?;
    write_file(&csv_path(config), series_csv(&traj, &record).as_bytes())?;
    Ok(0)
}

fn run_verify_command(config: &RunConfig, args: &RunArgs) -> Result<u8, RunError> {
    let output = run_verify(config)?;
    let mut report = Report::new(config, !args.no_timestamp);
    report.thermo_record = Some(output.record.clone());
    report.partition = Some(output.partition.clone());
    report.geometry_checks = Some(output.geometry_checks.clone());
    report.suites = Some(output.suites.clone());
    write_file(&report_path(config), report.to_json().as_bytes())?;
    for suite in &output.suites {
        eprintln!(
            "suite {:<28} {}  (max residual {:.3e}, tolerance {:.3e})",
            suite.name,
            if suite.pass { "pass" } else { "FAIL" },
            suite.max_residual,
            suite.tolerance
        );
    }
    Ok(if output.all_pass { 0 } else { 1 })
}

fn run_sweep(config: &RunConfig, _args: &RunArgs) -> Result<u8, RunError> {
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| RunError::Config("mode is sweep but no sweep block given".into()))?;
    let mut csv = String::from(sweep_csv_header());
    for &value in &sweep.values {
        let swept = config.with_sweep_value(&sweep.parameter, value)?;
        let (_, record) = run_record(&swept)?;
        csv.push_str(&sweep_csv_row(value, &record));
    }
    write_file(&csv_path(config), csv.as_bytes())?;
    Ok(0)
}
