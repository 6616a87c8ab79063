//! The `gaussflow` binary: exit codes, outputs on disk and the report path.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use gaussflow::io::read_trajectory_file;

fn gaussflow(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gaussflow")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn disc_run_ends_with_the_exact_area() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "n = 2\nresolution = 64\np = 0.5\ndirection = expanding_primal\nbody = ball 1\nt_end = 1\ncsv_every = 10\n",
    );
    let out = dir.path().join("out");
    let (code, _, err) = gaussflow(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let rows = read_trajectory_file(&out.join("trajectory.csv")).unwrap();
    let last = rows.last().unwrap();
    assert_eq!(last.t, 1.0);
    assert!((last.volume - PI * 2.25 * 2.25).abs() < 1e-8, "{}", last.volume);
    assert!(out.join("run_meta").exists());
    assert!(std::fs::read_dir(&out).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().starts_with("body_t")));

    let (code, report, _) = gaussflow(&["report", out.join("trajectory.csv").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(report.contains("PASS"));
}

#[test]
fn shrinking_disc_run_stops_on_extinction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "n = 2\nresolution = 64\np = 0.5\ndirection = shrinking_primal\nbody = ball 1\nv_stop_fraction = 1e-4\ncsv_every = 50\n",
    );
    let out = dir.path().join("out");
    let (code, stdout, err) = gaussflow(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("Extinction"), "{stdout}");
    let rows = read_trajectory_file(&out.join("trajectory.csv")).unwrap();
    assert!(rows.last().unwrap().volume < 1e-4 * PI);
}

#[test]
fn malformed_config_is_a_usage_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for text in [
        "n = 2\nresolution = 64\np = 0.5\nbody = ball 1\nt_end = 1\nbogus = 3\n",
        "n = 2\nresolution = 8\np = 0.5\nbody = ball 1\nt_end = 1\n",
        "n = 2\nresolution = 64\np = 0.5\nbody = ellipsoid 1 -2\nt_end = 1\n",
        "n = 2\nresolution = 64\np = 0.5\ndirection = shrinking_primal\nbody = ball 1\n",
    ] {
        let cfg = write_config(dir.path(), text);
        let (code, _, err) = gaussflow(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 2, "{text}: {err}");
        assert!(!out.exists(), "{text}");
    }
    let (code, _, _) = gaussflow(&["run", "--config", "/nonexistent/run.cfg", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(gaussflow(&["verify", "no-such-suite"]).0, 2);
    assert_eq!(gaussflow(&["verify", "rescaling", "--resolution", "8"]).0, 2);
    assert_eq!(gaussflow(&["verify", "rescaling", "--resolution", "sixty"]).0, 2);
    assert_eq!(gaussflow(&["verify", "g-properties", "--n", "4"]).0, 2);
    let (code, stdout, _) = gaussflow(&["verify", "g-properties", "--n", "3", "--trials", "200", "--seed", "3"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("[PASS]"));
    let (code, stdout, _) = gaussflow(&["verify", "kaltenbach", "--resolution", "128", "--tol", "1e-12"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("FAIL"));
}

#[test]
fn report_rejects_truncated_and_missing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "n = 2\nresolution = 64\np = 0.5\nbody = ellipsoid 1 1.5\nt_end = 0.5\ncsv_every = 5\n",
    );
    let out = dir.path().join("out");
    assert_eq!(gaussflow(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]).0, 0);
    let text = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let cut = dir.path().join("cut.csv");
    std::fs::write(&cut, &text[..text.len() - 40]).unwrap();
    assert_eq!(gaussflow(&["report", cut.to_str().unwrap()]).0, 2);
    let header_only = dir.path().join("header.csv");
    std::fs::write(&header_only, text.lines().next().unwrap()).unwrap();
    assert_eq!(gaussflow(&["report", header_only.to_str().unwrap()]).0, 2);
    assert_eq!(gaussflow(&["report", dir.path().join("absent.csv").to_str().unwrap()]).0, 2);
    assert_eq!(gaussflow(&["bogus"]).0, 2);
}
