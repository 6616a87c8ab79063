//! Acceptance criteria 1 to 10, each reported on one PASS/FAIL line.
//!
//! The criteria run on separate threads; the lines are printed in order once
//! all have finished, followed by the detailed reports of any failures.

use std::process::ExitCode;
use std::thread;

use gaussflow::config::RunConfig;
use gaussflow::diagnostics::Report;
use gaussflow::error::Result;
use gaussflow::runner::run_config;
use gaussflow::verify::{run_suite, VerifyOptions};

struct Outcome {
    passed: bool,
    summary: String,
    detail: String,
}

fn suites(runs: &[(&str, VerifyOptions)]) -> Result<Outcome> {
    let mut passed = true;
    let mut summary = Vec::new();
    let mut detail = String::new();
    for (suite, opts) in runs {
        let report: Report = run_suite(suite, opts)?;
        passed &= report.passed();
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        summary.push(format!("{suite} n={}: {}/{} checks", opts.n, report.checks.len() - failed, report.checks.len()));
        detail.push_str(&report.to_string());
    }
    Ok(Outcome { passed, summary: summary.join("; "), detail })
}

const DETERMINISM_CONFIG: &str = "\
n = 2
resolution = 128
p = 0.5
direction = expanding_primal
phi = dipole 0.2 0.6 0.8
body = harmonic 1 2:2:0.05 3:-3:0.02
t_end = 1.5
csv_every = 3
snapshot_every = 100
";

fn determinism() -> Result<Outcome> {
    let cfg = RunConfig::parse(DETERMINISM_CONFIG)?;
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir()?;
        run_config(&cfg, dir.path())?;
        bytes.push(std::fs::read(dir.path().join("trajectory.csv"))?);
    }
    let same = bytes[0] == bytes[1];
    Ok(Outcome {
        passed: same && !bytes[0].is_empty(),
        summary: format!("two runs wrote {} and {} bytes, identical: {same}", bytes[0].len(), bytes[1].len()),
        detail: String::new(),
    })
}

type Criterion = Box<dyn FnOnce() -> Result<Outcome> + Send>;

fn main() -> ExitCode {
    let n2 = || VerifyOptions::new(2);
    let n3 = || VerifyOptions::new(3);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("ball exact solution", Box::new(move || suites(&[("ball-exact", n2()), ("ball-exact", n3())]))),
        ("dual-flow cross-validation", Box::new(move || suites(&[("dual-crosscheck", n2())]))),
        ("Kaltenbach identity", Box::new(move || suites(&[("kaltenbach", n2()), ("kaltenbach", n3())]))),
        ("rescaling property", Box::new(move || suites(&[("rescaling", n2())]))),
        ("convergence to the unit ball", Box::new(move || suites(&[("convergence", n2()), ("convergence", n3())]))),
        ("gradient and oscillation bound", Box::new(move || suites(&[("gradient-bound", n2()), ("gradient-bound", n3())]))),
        ("curvature band", Box::new(move || suites(&[("curvature", n2()), ("curvature", n3())]))),
        ("shrinking flow", Box::new(move || suites(&[("shrinking-widths", n2().with_p(0.9))]))),
        ("G properties", Box::new(move || suites(&[("g-properties", n2()), ("g-properties", n3())]))),
        ("determinism", Box::new(determinism)),
    ];

    let outcomes: Vec<(&str, Result<Outcome>)> = thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .into_iter()
            .map(|(name, f)| (name, scope.spawn(f)))
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| (name, h.join().expect("criterion thread panicked")))
            .collect()
    });

    let mut all = true;
    let mut details = String::new();
    for (k, (name, outcome)) in outcomes.iter().enumerate() {
        let (passed, text) = match outcome {
            Ok(o) => {
                if !o.passed {
                    details.push_str(&o.detail);
                }
                (o.passed, o.summary.clone())
            }
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!("{} criterion {}: {name}: {text}", if passed { "PASS" } else { "FAIL" }, k + 1);
    }
    if !details.is_empty() {
        println!("\n{details}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
