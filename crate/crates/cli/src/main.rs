use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uavnet_cli::{
    cmd_baseline, cmd_eval, cmd_generate, cmd_plot, cmd_solve, parse_objective, CliError, GenerateArgs, SolveArgs,
};

/// Joint scheduling, trajectory and power design for multi-UAV downlinks.
#[derive(Parser)]
#[command(name = "uavnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random scenario and write it as JSON.
    Generate {
        #[arg(long)]
        users: usize,
        #[arg(long)]
        uavs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trajectory period in seconds.
        #[arg(long, default_value_t = 210.0)]
        period: f64,
        /// Number of slots (defaults to one per second).
        #[arg(long)]
        slots: Option<usize>,
        /// Area width and height in meters.
        #[arg(long, num_args = 2, value_names = ["W", "H"])]
        area: Option<Vec<f64>>,
        /// Flight altitude in meters.
        #[arg(long)]
        altitude: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the block-coordinate optimizer.
    Solve {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// mean, min or logw.
        #[arg(long, default_value = "mean")]
        objective: String,
        /// Relative gain below which the outer loop stops.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_outer: Option<usize>,
        #[arg(long)]
        no_power_opt: bool,
        #[arg(long)]
        no_kmeans_init: bool,
    },
    /// Evaluate a comparison scheme.
    Baseline {
        scenario: PathBuf,
        /// static or circular.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print rates and constraint violations of a solution.
    Eval { scenario: PathBuf, solution: PathBuf },
    /// Render a solution as SVG plus a CSV of waypoints.
    Plot {
        scenario: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { users, uavs, seed, period, slots, area, altitude, out } => {
            let area = area.map(|v| [v[0], v[1]]);
            cmd_generate(&GenerateArgs { users, uavs, seed, period, slots, area, altitude, out })?;
        }
        Command::Solve { scenario, out, objective, tol, max_outer, no_power_opt, no_kmeans_init } => {
            let file = cmd_solve(&SolveArgs {
                scenario,
                out,
                objective: parse_objective(&objective)?,
                tol,
                max_outer,
                power_opt: !no_power_opt,
                kmeans_init: !no_kmeans_init,
            })?;
            println!("objective_bps_hz={}", file.objective_bps_hz);
        }
        Command::Baseline { scenario, kind, out } => {
            let file = cmd_baseline(&scenario, kind.parse()?, &out)?;
            println!("objective_bps_hz={}", file.objective_bps_hz);
        }
        Command::Eval { scenario, solution } => {
            let report = cmd_eval(&scenario, &solution)?;
            print!("{}", report.render());
            if !report.feasible {
                return Err(CliError::Infeasible);
            }
        }
        Command::Plot { scenario, solution, out } => {
            let csv = cmd_plot(&scenario, &solution, &out)?;
            println!("wrote {} and {}", out.display(), csv.display());
        }
    }
    Ok(())
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
