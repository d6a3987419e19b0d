use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relgeo::scenario::{self, Command};
use relgeo::{report, run, CliError, Options};

/// Verification runs for relative differential geometry.
///
/// Exit status: 0 all checks pass, 1 a tolerance check fails,
/// 2 the scenario is invalid, 3 a numerical guard tripped.
#[derive(Parser)]
#[command(name = "relgeo", version)]
struct Cli {
    /// Quadrature resolution; for `pde`, the size of a range ℓ-grid.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Multiplies every upper-bound tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    /// Per-node (or per-α) rows for plotting.
    #[arg(long, global = true)]
    emit_csv: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// First-variation identity for the power family.
    Identity { file: PathBuf },
    /// The conditions on f over a grid of principal curvatures.
    Pde { file: PathBuf },
    /// Closed-surface integral formula, divergence identity and sphere checks.
    Sphere { file: PathBuf },
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let (command, file) = match &cli.command {
        Cmd::Identity { file } => (Command::Identity, file),
        Cmd::Pde { file } => (Command::Pde, file),
        Cmd::Sphere { file } => (Command::Sphere, file),
    };
    let sc = scenario::load(file)?;
    let common = sc.common();
    let opts = Options {
        grid: cli.grid,
        tolerance_scale: cli.tolerance_scale,
        emit_csv: cli.emit_csv.clone().or(common.outputs.csv),
        json: cli.json.clone().or(common.outputs.json),
    };
    let out = run(command, &sc, &opts)?;
    for c in &out.checks {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        match c.limit {
            Some(l) => eprintln!("{verdict} {}: {:.3e} (limit {l:.1e})", c.name, c.value),
            None => eprintln!("{verdict} {}", c.name),
        }
    }
    match &opts.json {
        Some(p) => report::write_text(p, &out.json)?,
        None => print!("{}", out.json),
    }
    if let Some(p) = &opts.emit_csv {
        out.table.write_csv(p)?;
    }
    Ok(out.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("relgeo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
