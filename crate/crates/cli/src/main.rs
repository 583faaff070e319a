//! `fduav` — solve full-duplex UAV capacity instances and run the paper-style
//! parameter sweeps from the command line.

use clap::{Parser, Subcommand};
use fduav_core::baselines::{self, SchemeId};
use fduav_core::bcd::BcdSettings;
use fduav_core::error::Error;
use fduav_core::experiments::{self, SweepSpec};
use fduav_core::scenario;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fduav", version, about = "Full-duplex UAV base-station capacity solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario under one scheme and export the solution files.
    Solve {
        /// Scenario file (key = value format).
        #[arg(long)]
        scenario: PathBuf,
        /// Scheme: proposed, ideal_no_interference, no_power_control,
        /// straight_flight, static, or half_duplex (alias hd).
        #[arg(long, default_value = "proposed")]
        scheme: String,
        /// Optional solver settings file.
        #[arg(long)]
        settings: Option<PathBuf>,
        /// Output directory for trajectory/schedule/power/rates CSVs and
        /// solution.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep one parameter over a value list for one or more schemes.
    Sweep {
        /// Swept parameter: T, fb_db, or H.
        #[arg(long)]
        param: String,
        /// Comma list (a,b,c) or inclusive range (start:stop:step).
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Comma-separated scheme list.
        #[arg(long)]
        schemes: String,
        /// Base scenario file.
        #[arg(long)]
        scenario: PathBuf,
        /// Optional solver settings file.
        #[arg(long)]
        settings: Option<PathBuf>,
        /// Output directory for summary.csv and per-cell solutions.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_settings(path: &Option<PathBuf>) -> Result<BcdSettings, Error> {
    match path {
        Some(p) => experiments::load_settings(p),
        None => Ok(BcdSettings::default()),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Solve {
            scenario: scenario_path,
            scheme,
            settings,
            out,
        } => {
            let scenario = scenario::load_scenario(&scenario_path)?;
            let scheme: SchemeId = scheme.parse()?;
            let settings = load_settings(&settings)?;
            let solution = baselines::run_scheme(scheme, &scenario, &settings)?;
            experiments::export_solution(&solution, &scenario, &out)?;
            // Objective is bits/s/Hz summed over slots; B*delta turns it
            // into a throughput volume for human consumption.
            let mbits = solution.final_binary_objective
                * scenario.bandwidth
                * scenario.slot_duration
                / 1e6;
            println!(
                "{scheme}: binary objective {:.6} bits/s/Hz (relaxed {:.6}, {} outer passes, {:.2} Mbit over {} s)",
                solution.final_binary_objective,
                solution.final_relaxed_objective,
                solution.iterations_used,
                mbits,
                scenario.period
            );
            println!("results written to {}", out.display());
            Ok(())
        }
        Command::Sweep {
            param,
            values,
            schemes,
            scenario: scenario_path,
            settings,
            out,
        } => {
            let spec = SweepSpec {
                param: param.parse()?,
                values: experiments::parse_value_list(&values)?,
                schemes: schemes
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<Vec<SchemeId>, Error>>()?,
                scenario_path,
                out_dir: out.clone(),
            };
            let rows = experiments::run_sweep(&spec, &load_settings(&settings)?)?;
            let failures = rows.iter().filter(|r| r.status != "ok").count();
            println!(
                "{} cells ({} failed); summary at {}",
                rows.len(),
                failures,
                out.join("summary.csv").display()
            );
            Ok(())
        }
    }
}
