//! Command implementations behind the `gaussflow` binary. Each `cmd_*`
//! function prints its own output and returns the process exit code.

use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::diagnostics::{record, trajectory_report};
use crate::error::{Error, Result};
use crate::flow::{integrate, FlowState, StopReason};
use crate::io::{create_trajectory, read_trajectory_file, snapshot_name, write_snapshot};
use crate::verify::{run_suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
/// A check ran to completion and failed.
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// What a finished run produced.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub t_final: f64,
    pub steps: usize,
    pub reason: StopReason,
    pub rows: usize,
    pub snapshots: Vec<PathBuf>,
}

/// Runs `cfg` and writes `trajectory.csv`, `body_t<t>.csv` snapshots and
/// `run_meta` into `out`.
pub fn run_config(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    let (body, flow) = cfg.prepare()?;
    std::fs::create_dir_all(out)?;
    let n = cfg.n;
    let mut writer = create_trajectory(&out.join("trajectory.csv"), n)?;
    let mut rows = 0;
    let mut snapshots = Vec::new();
    let mut last_row = usize::MAX;
    let mut last_snap = usize::MAX;
    let state = FlowState::new(body, flow.direction)?;
    let outcome = integrate(state, &flow, &[], |s, _| {
        let k = s.step_count;
        let row = k % cfg.csv_every == 0;
        let snap = k == 0 || (cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0);
        if row || snap {
            let primal = s.primal_body()?;
            if row {
                writer.write(&record(&primal, s.t, s.dt_last, &flow.phi, flow.p))?;
                rows += 1;
                last_row = k;
            }
            if snap {
                let path = out.join(snapshot_name(s.t));
                write_snapshot(&path, primal.support(), s.t)?;
                snapshots.push(path);
                last_snap = k;
            }
        }
        Ok(())
    });
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            writer.finish()?;
            return Err(e);
        }
    };
    let s = &outcome.state;
    if last_row != s.step_count || last_snap != s.step_count {
        let primal = s.primal_body()?;
        if last_row != s.step_count {
            writer.write(&record(&primal, s.t, s.dt_last, &flow.phi, flow.p))?;
            rows += 1;
        }
        if last_snap != s.step_count {
            let path = out.join(snapshot_name(s.t));
            write_snapshot(&path, primal.support(), s.t)?;
            snapshots.push(path);
        }
    }
    writer.finish()?;

    let grid = s.grid();
    let mut meta = format!(
        "# gaussflow {}\n# grid: n = {n}, resolution {}, {} nodes, h_min = {:e}\n# finished: t = {}, steps = {}, stop = {:?}{}\n",
        env!("CARGO_PKG_VERSION"),
        grid.resolution(),
        grid.len(),
        grid.h_min(),
        s.t,
        s.step_count,
        outcome.reason,
        if flow.outside_theory() { "\n# note: expanding run with p >= 1 is outside the theory's range" } else { "" },
    );
    meta.push_str(&cfg.to_text());
    std::fs::write(out.join("run_meta"), meta)?;

    Ok(RunSummary {
        t_final: s.t,
        steps: s.step_count,
        reason: outcome.reason,
        rows,
        snapshots,
    })
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// `run --config <path> --out <dir>`.
pub fn cmd_run(config: &Path, out: &Path) -> i32 {
    let cfg = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match run_config(&cfg, out) {
        Ok(s) => {
            println!(
                "finished at t = {} after {} steps ({:?}); {} trajectory rows, {} snapshots in {}",
                s.t_final,
                s.steps,
                s.reason,
                s.rows,
                s.snapshots.len(),
                out.display()
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

/// `verify <suite> [options]`.
pub fn cmd_verify(suite: &str, opts: &VerifyOptions) -> i32 {
    match run_suite(suite, opts) {
        Ok(report) => {
            print!("{report}");
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

/// The run config stored in a `run_meta` next to the CSV, if there is one.
fn sibling_config(csv: &Path) -> Option<RunConfig> {
    let meta = csv.parent()?.join("run_meta");
    RunConfig::load(&meta).ok()
}

/// `report <csv> [--p P]`.
pub fn cmd_report(csv: &Path, p: Option<f64>) -> i32 {
    let records = match read_trajectory_file(csv) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if records.is_empty() {
        eprintln!("error: {} has no rows", csv.display());
        return EXIT_USAGE;
    }
    let meta = sibling_config(csv);
    let p = p.or_else(|| meta.as_ref().map(|c| c.flow.p));
    // without a run_meta the weight is unknown and taken to be constant 1
    let isotropic = meta.is_none_or(|c| c.flow.phi.is_unit());
    match trajectory_report(&records, p, isotropic) {
        Ok(report) => {
            print!("{report}");
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
