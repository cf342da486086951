//! `slp-lab`: phase-matching geometry and pulse-sequence simulations from the
//! command line.
//!
//! Exit status is 0 on success, 1 when the solver fails numerically and 2 for
//! bad input (unreadable files, parse errors, invalid parameters).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use slp_core::geometry::{mirror_solution, solution_cone};
use slp_core::io::write_outcome;
use slp_core::scenario::BUILTIN_NAMES;
use slp_core::units::{parse_quantity, Dimension};
use slp_core::{
    builtin, execute, parse_params, BeamFrequencies, Error, Grid, Outcome, ParamSet,
    PhaseMatchSolution, RunOptions, Scenario, SolverKind,
};

const DEFAULT_OUT: &str = "slp-out";

#[derive(Parser)]
#[command(
    name = "slp-lab",
    version,
    about = "Stationary-light-pulse simulation laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the phase-matching geometry and print the probe angle and mismatch.
    PhaseMatch(PhaseMatchArgs),
    /// Simulate a pulse sequence and write traces plus a JSON report.
    Run(RunArgs),
    /// List the built-in scenarios.
    Scenarios,
}

#[derive(Args)]
struct PhaseMatchArgs {
    /// Parameter file (defaults to the built-in Rb D1 set).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Also print the mirror-image solution.
    #[arg(long)]
    mirror: bool,
    /// Azimuth of the probe about the FWC axis, e.g. `90deg`.
    #[arg(long, default_value = "0rad")]
    azimuth: String,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Adiabatic,
    Full,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    params: Option<PathBuf>,
    /// Built-in scenario name (see `slp-lab scenarios`).
    #[arg(
        long,
        conflicts_with = "sequence",
        required_unless_present = "sequence"
    )]
    scenario: Option<String>,
    /// Sequence file in the `.seq` format.
    #[arg(long)]
    sequence: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "SLP_LAB_OUT")]
    out: Option<PathBuf>,
    #[arg(long = "grid.nz", default_value_t = Grid::DEFAULT_NZ)]
    grid_nz: usize,
    /// Time step with unit, e.g. `0.5ns`.
    #[arg(long = "grid.dt", default_value = "1ns")]
    grid_dt: String,
    #[arg(long, value_enum, default_value_t = SolverArg::Adiabatic)]
    solver: SolverArg,
    /// Skip the time-step stability check.
    #[arg(long)]
    unchecked: bool,
    /// Print the report as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::PhaseMatch(a) => phase_match(&a),
        Command::Run(a) => run(&a),
        Command::Scenarios => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::NumericalBlowUp { .. }) | Some(Error::Measurement(_)) => 1,
        _ => 2,
    }
}

fn load_params(path: Option<&Path>) -> Result<ParamSet> {
    match path {
        None => Ok(ParamSet::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse_params(&text).with_context(|| format!("in {}", p.display()))
        }
    }
}

fn quantity(text: &str, dim: Dimension, what: &str) -> Result<f64> {
    parse_quantity(text, dim).map_err(|e| Error::Config(format!("{what}: {}", e.message)).into())
}

fn phase_match(a: &PhaseMatchArgs) -> Result<()> {
    let p = load_params(a.params.as_deref())?;
    let azimuth = quantity(&a.azimuth, Dimension::Angle, "--azimuth")?;
    let freqs = BeamFrequencies::from_constants(&p.constants, p.controls.delta);
    let sol = solution_cone(
        &freqs,
        p.constants.c0,
        azimuth,
        p.ensemble.length,
        p.bwc_tilt,
    )?;
    let mut rows = vec![("solution", sol)];
    if a.mirror {
        rows.push(("mirror", mirror_solution(&sol)));
    }
    if a.json {
        let v: Vec<_> = rows
            .iter()
            .map(|(label, s)| json!({ "label": label, "solution": s }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("{}", table_header());
        for (label, s) in &rows {
            println!("{}", table_row(label, s));
        }
    }
    Ok(())
}

fn table_header() -> String {
    format!(
        "{:<10} {:>10} {:>12} {:>14} {:>12}",
        "", "angle_deg", "azimuth_deg", "dk_per_m", "dkL"
    )
}

fn table_row(label: &str, s: &PhaseMatchSolution) -> String {
    format!(
        "{:<10} {:>10.4} {:>12.4} {:>14.6e} {:>12.6e}",
        label,
        s.angle_deg(),
        s.azimuth.to_degrees(),
        s.delta_k,
        s.delta_k_l
    )
}

fn run(a: &RunArgs) -> Result<()> {
    let params = load_params(a.params.as_deref())?;
    let scenario = match (&a.scenario, &a.sequence) {
        (Some(name), _) => builtin(name, &params)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "sequence".into());
            Scenario::from_text(&name, &text, params)
                .with_context(|| format!("in {}", path.display()))?
        }
        (None, None) => unreachable!("clap requires one of --scenario/--sequence"),
    };
    let dt = quantity(&a.grid_dt, Dimension::Time, "--grid.dt")?;
    let grid = Grid::new(a.grid_nz, scenario.params.ensemble.length, dt)?;
    let opts = RunOptions {
        solver: match a.solver {
            SolverArg::Adiabatic => SolverKind::Adiabatic,
            SolverArg::Full => SolverKind::Full,
        },
        unchecked: a.unchecked,
        ..RunOptions::default()
    };
    let outcome = execute(&scenario, &grid, &opts)?;
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let written = write_outcome(&outcome, &dir)?;
    if a.json {
        println!("{}", report_json(&outcome, &written)?);
    } else {
        print!("{}", report_table(&outcome, &written));
    }
    Ok(())
}

fn report_json(outcome: &Outcome, written: &[PathBuf]) -> Result<String> {
    let points: Vec<_> = outcome
        .points
        .iter()
        .map(|p| json!({ "value_us": p.value.map(|v| v * 1e6), "metrics": p.metrics }))
        .collect();
    let v = json!({
        "scenario": outcome.scenario.name,
        "points": points,
        "fits": outcome.fits.iter().map(|f| json!({ "channel": f.channel, "report": f.report })).collect::<Vec<_>>(),
        "files": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    Ok(serde_json::to_string_pretty(&v)?)
}

fn opt(v: Option<f64>, scale: f64) -> String {
    v.map(|x| format!("{:.4}", x * scale))
        .unwrap_or_else(|| "-".into())
}

fn report_table(outcome: &Outcome, written: &[PathBuf]) -> String {
    let mut s = format!("scenario {}\n", outcome.scenario.name);
    s += &format!(
        "{:>9} {:>3} {:>12} {:>12} {:>12} {:>10} {:>10} {:>10}\n",
        "value_us", "ch", "transm_%", "retrieval_%", "release_%", "trapped", "delay_us", "closure"
    );
    for p in &outcome.points {
        for m in &p.metrics {
            s += &format!(
                "{:>9} {:>3} {:>12.4} {:>12} {:>12} {:>10} {:>10} {:>10.2e}\n",
                opt(p.value, 1e6),
                m.channel,
                m.transmission * 100.0,
                opt(m.retrieval_efficiency, 100.0),
                opt(m.release_efficiency, 100.0),
                opt(m.trapped_emission_ratio, 1.0),
                opt(m.group_delay, 1e6),
                m.max_closure_error
            );
        }
    }
    for f in &outcome.fits {
        s += &format!("\nchannel {} decay fit\n{}", f.channel, f.report.to_table());
    }
    s += "\n";
    for p in written {
        s += &format!("wrote {}\n", p.display());
    }
    s
}
