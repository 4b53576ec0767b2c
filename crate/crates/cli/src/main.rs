mod commands;
mod report;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Ctx;
use report::Failure;
use scenario::Scenario;

#[derive(Parser)]
#[command(name = "terrace", version, about = "Fronts, energies and terraces for damped hyperbolic gradient systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Output directory; defaults to the scenario's `out` or `out/<name>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Treat inequality-slack breaches as failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Critical points, spectra and scalar constants of the potential.
    AnalyzePotential(Common),
    /// Fronts between every pair of minima of different depth.
    SolveFront(Common),
    /// Run the scenario and write the snapshot and diagnostic series.
    Simulate(Common),
    /// Simulate, then fit the terraces on both sides and report the centre.
    FitTerrace(Common),
    /// Run the bundled acceptance scenarios and print the result table.
    Verify(Common),
}

fn load(c: &Common) -> Result<(Scenario, terrace_core::PotentialSpec, PathBuf), Failure> {
    let path = c
        .scenario
        .as_ref()
        .ok_or_else(|| Failure::invalid("cli", "--scenario is required for this subcommand"))?;
    let (sc, v) = Scenario::load(path)?;
    let out = c
        .out
        .clone()
        .or_else(|| sc.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&sc.name));
    Ok((sc, v, out))
}

fn dispatch(cmd: &Cmd) -> (Result<bool, Failure>, Option<PathBuf>) {
    let (c, op) = match cmd {
        Cmd::AnalyzePotential(c) => (c, "analyze-potential"),
        Cmd::SolveFront(c) => (c, "solve-front"),
        Cmd::Simulate(c) => (c, "simulate"),
        Cmd::FitTerrace(c) => (c, "fit-terrace"),
        Cmd::Verify(c) => (c, "verify"),
    };
    if let Some(k) = c.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            return (Err(Failure::invalid("cli", e.to_string()).in_op(op)), None);
        }
    }
    if let Cmd::Verify(_) = cmd {
        return (commands::verify(c.out.as_deref()).map_err(|e| e.in_op(op)), c.out.clone());
    }
    let (sc, v, out) = match load(c) {
        Ok(x) => x,
        Err(e) => return (Err(e.in_op(op)), c.out.clone()),
    };
    let ctx = Ctx {
        out: out.clone(),
        strict: c.strict,
    };
    let r = match cmd {
        Cmd::AnalyzePotential(_) => commands::analyze_potential(&sc, &v, &ctx),
        Cmd::SolveFront(_) => commands::solve_front(&sc, &v, &ctx),
        Cmd::Simulate(_) => commands::simulate(&sc, &v, &ctx).map(|s| s.pass),
        Cmd::FitTerrace(_) => commands::fit(&sc, &v, &ctx),
        Cmd::Verify(_) => unreachable!(),
    };
    (r.map_err(|e| e.in_op(op)), Some(out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.cmd) {
        (Ok(true), _) => ExitCode::SUCCESS,
        (Ok(false), _) => ExitCode::from(1),
        (Err(e), out) => {
            e.emit(out.as_deref());
            ExitCode::from(e.exit_code())
        }
    }
}
