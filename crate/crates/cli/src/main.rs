//! `pipeflow` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O error, 2 validation error, 3 numerical
//! failure. Log verbosity follows `PIPEFLOW_LOG` (`error` .. `trace`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pipeflow::run::{export_kernels, run_batch, Overrides};
use pipeflow::scenario::{PlantKind, Scenario};
use pipeflow::Error;

#[derive(Parser)]
#[command(name = "pipeflow", version, about = "Gas pipeline simulation with boundary control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenarios (preset names or JSON files).
    Run {
        #[arg(required = true)]
        scenarios: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
        /// Horizon in seconds.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, value_enum)]
        plant: Option<PlantArg>,
    },
    /// Export the kernel grids and feedback gain of a scenario.
    Kernels {
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Check that a scenario file parses and validates.
    Validate { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlantArg {
    Nonlinear,
    Linear,
}

impl From<PlantArg> for PlantKind {
    fn from(p: PlantArg) -> Self {
        match p {
            PlantArg::Nonlinear => PlantKind::Nonlinear,
            PlantArg::Linear => PlantKind::LinearCanonical,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else if e.is_io() {
        1
    } else {
        3
    }
}

fn fail(context: &str, e: &Error) -> ExitCode {
    eprintln!("error: {context}: {e}");
    ExitCode::from(exit_code(e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PIPEFLOW_LOG", "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenarios, out, grid, horizon, plant } => {
            let ov = Overrides { grid, horizon, plant: plant.map(Into::into) };
            let mut resolved = Vec::with_capacity(scenarios.len());
            for spec in &scenarios {
                match Scenario::resolve(spec).and_then(|sc| ov.apply(sc)) {
                    Ok(sc) => resolved.push(sc),
                    Err(e) => return fail(spec, &e),
                }
            }
            let mut code = ExitCode::SUCCESS;
            for (name, res) in run_batch(&resolved, &out) {
                match res {
                    Ok(summary) => {
                        println!(
                            "{name}: peak |δρ(ℓ)| = {:.6e}, steady residual = {:.6e}, settling time = {}",
                            summary.peak_outlet_deviation,
                            summary.steady_residual,
                            summary.settling_time.map_or("none".into(), |t| format!("{t} s")),
                        );
                        for w in &summary.warnings {
                            println!("{name}: warning: {w}");
                        }
                    }
                    Err(e) => {
                        if code == ExitCode::SUCCESS {
                            code = fail(&name, &e);
                        } else {
                            fail(&name, &e);
                        }
                    }
                }
            }
            code
        }
        Command::Kernels { scenario, out, grid } => {
            let ov = Overrides { grid, ..Default::default() };
            match Scenario::resolve(&scenario)
                .and_then(|sc| ov.apply(sc))
                .and_then(|sc| export_kernels(&sc, &out))
            {
                Ok(()) => {
                    println!("kernels written to {}", out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&scenario, &e),
            }
        }
        Command::Validate { file } => match pipeflow::scenario::load_scenario(&file) {
            Ok(sc) => {
                println!("{}: ok ({} steps of {:.6} s)", sc.name, sc.steps(), sc.time_step());
                ExitCode::SUCCESS
            }
            Err(e) => fail(&file.display().to_string(), &e),
        },
    }
}
