//! End-to-end checks of the command line surface.

use std::process::Command;

fn sladr() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sladr"))
}

#[test]
fn run_writes_checkpoints_and_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = sladr()
        .args([
            "run",
            "--problem",
            "pure_diffusion",
            "--scheme",
            "sl2",
            "--dx",
            "0.1",
            "--mu",
            "0.84",
            "--checkpoints",
            "0.5,1",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("relative errors"), "{stdout}");
    assert!(stdout.contains("species 0: min"), "{stdout}");
    // Structured runs dump CSV and raster per checkpoint.
    for t in ["0.5", "1"] {
        assert!(dir.path().join(format!("pure_diffusion_t{t}.csv")).exists());
        assert!(dir.path().join(format!("pure_diffusion_t{t}.raster")).exists());
    }
}

#[test]
fn run_accepts_config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("setup.ini");
    std::fs::write(&cfg, "problem = pure_diffusion\nscheme = sl1\ndx = 0.2\nmu = 0.84\n").unwrap();
    let out = sladr()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--scheme", "sl2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    // The effective configuration echoes the merged values.
    assert!(stderr.contains("scheme = sl2"), "{stderr}");
    assert!(stderr.contains("problem = pure_diffusion"), "{stderr}");
}

#[test]
fn usage_errors_exit_with_code_two() {
    let code = |args: &[&str]| {
        sladr()
            .args(args)
            .output()
            .unwrap()
            .status
            .code()
            .unwrap_or(-1)
    };
    // Missing problem name.
    assert_eq!(code(&["run", "--dt", "0.1"]), 2);
    // Unknown problem.
    assert_eq!(code(&["run", "--problem", "nope", "--dt", "0.1"]), 2);
    // Unknown suite lists the valid ones.
    let out = sladr().args(["bench", "--suite", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pure_diffusion"));
    // Unknown flags are clap usage errors.
    assert_eq!(code(&["run", "--seed", "1"]), 2);
}

#[test]
fn reading_a_mesh_file_works_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    // A coarse triangulation of (-1,1)^2 as a split grid, written in the
    // text format.
    let n = 10usize;
    let mut text = String::new();
    let nv = (n + 1) * (n + 1);
    let nt = 2 * n * n;
    text.push_str(&format!("{nv} {nt}\n"));
    for j in 0..=n {
        for i in 0..=n {
            text.push_str(&format!(
                "{} {}\n",
                -1.0 + 2.0 * i as f64 / n as f64,
                -1.0 + 2.0 * j as f64 / n as f64
            ));
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            text.push_str(&format!("{a} {b} {c}\n{a} {c} {d}\n"));
        }
    }
    let mesh_path = dir.path().join("square.mesh");
    std::fs::write(&mesh_path, text).unwrap();
    let out = sladr()
        .args(["run", "--problem", "bc_diffusion", "--mesh"])
        .arg(&mesh_path)
        .args(["--mu", "1.56", "--interp", "p2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("relative errors"));
}

#[test]
fn env_var_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = sladr()
        .env("SLADR_OUT", dir.path())
        .args([
            "run",
            "--problem",
            "pure_diffusion",
            "--dx",
            "0.2",
            "--dt",
            "0.25",
            "--checkpoints",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("pure_diffusion_t1.csv").exists());
}
