//! Parses a run configuration, runs it into a temporary directory and feeds
//! the resulting trajectory back through the report checks.

use gaussflow::config::RunConfig;
use gaussflow::diagnostics::trajectory_report;
use gaussflow::io::read_trajectory_file;
use gaussflow::runner::run_config;

const CONFIG: &str = "\
# a lopsided ellipse under a mild dipole weight
n = 2
resolution = 128
p = 0.5
direction = expanding_primal
phi = dipole 0.2 1 0
body = ellipsoid 1 1.6
t_end = 4
csv_every = 25
snapshot_every = 200
";

fn main() -> gaussflow::error::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    let out = std::env::temp_dir().join(format!("gaussflow-example-{}", std::process::id()));
    let summary = run_config(&cfg, &out)?;
    println!(
        "t = {} after {} steps, {} rows, {} snapshots in {}",
        summary.t_final,
        summary.steps,
        summary.rows,
        summary.snapshots.len(),
        out.display()
    );
    let records = read_trajectory_file(&out.join("trajectory.csv"))?;
    print!("{}", trajectory_report(&records, Some(cfg.flow.p), cfg.flow.phi.is_unit())?);
    std::fs::remove_dir_all(&out)?;
    Ok(())
}
