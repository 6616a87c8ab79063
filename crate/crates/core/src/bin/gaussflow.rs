use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaussflow::runner::{cmd_report, cmd_run, cmd_verify};
use gaussflow::verify::VerifyOptions;

#[derive(Parser)]
#[command(name = "gaussflow", version, about = "Gauss curvature flows of convex bodies via support functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a flow described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification suite.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        p: Option<f64>,
        /// N on the circle, or N_theta x N_phi on the sphere.
        #[arg(long)]
        resolution: Option<String>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Re-check the bounds on a saved trajectory.csv.
    Report {
        csv: PathBuf,
        #[arg(long)]
        p: Option<f64>,
    },
}

fn parse_resolution(s: &str) -> Result<Vec<usize>, String> {
    s.split(['x', 'X', ','])
        .map(|c| c.trim().parse::<usize>().map_err(|e| format!("bad resolution '{s}': {e}")))
        .collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run { config, out } => cmd_run(&config, &out),
        Command::Verify { suite, n, p, resolution, trials, seed, tol } => {
            let resolution = match resolution.as_deref().map(parse_resolution).transpose() {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            cmd_verify(&suite, &VerifyOptions { n, p, resolution, trials, seed, tol })
        }
        Command::Report { csv, p } => cmd_report(&csv, p),
    };
    ExitCode::from(code as u8)
}
