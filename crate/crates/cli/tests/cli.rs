//! End-to-end checks of the binary: exit codes, JSON/CSV shapes, seed
//! precedence, and the documented example invocations.

use std::path::Path;
use std::process::{Command, Output};

fn besq() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_besq"));
    // Tests control seeding explicitly; an ambient seed would change
    // outputs underneath them.
    cmd.env_remove("BESQ_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    besq().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("file exists")).expect("valid json")
}

#[test]
fn wallach_check_decides_all_three_branches() {
    let out = run(&["wallach-check", "-p", "3", "-b", "1", "--x0", "diag:1,1,1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["member"], true);
    assert_eq!(v["branch"], "threshold");
    assert_eq!(v["rank"], 3);

    let out = run(&["wallach-check", "-p", "3", "-b", "0.5", "--x0", "diag:1,1,0"]);
    assert_eq!(code(&out), 2);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["member"], false);
    assert_eq!(v["rank"], 2);

    let out = run(&["wallach-check", "-p", "3", "-b", "0.5", "--x0", "diag:1,0,0"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["member"], true);
    assert_eq!(v["branch"], "discrete");
}

#[test]
fn malformed_input_exits_1_with_a_diagnostic() {
    // Wrong diagonal length for the stated dimension.
    let out = run(&["wallach-check", "-p", "3", "-b", "1", "--x0", "diag:1,2"]);
    assert_eq!(code(&out), 1);
    assert!(!stderr(&out).is_empty());

    let out = run(&["wallach-check", "-p", "2", "-b", "1", "--x0", "gibberish"]);
    assert_eq!(code(&out), 1);

    let out = run(&["wallach-check", "-p", "2", "-b", "1", "--x0", "identity", "--frobnicate"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--frobnicate"));

    // Degenerate grid.
    let out = run(&["simulate", "--mode", "matrix", "-a", "3", "--dt", "0"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn simulate_reproduces_exactly_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let base = [
        "simulate", "--mode", "matrix", "-p", "2", "-a", "3", "--x0", "diag:1,1", "--t", "1",
        "--dt", "0.0009765625", "--paths", "1",
    ];
    for (file, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let out = besq()
            .args(base)
            .args(["--seed", seed, "--out", file.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());
    assert_ne!(bytes_a, std::fs::read(&c).unwrap());
}

#[test]
fn simulate_particle_columns_stay_sorted() {
    let out = run(&[
        "simulate", "--mode", "particles", "-p", "2", "-a", "1", "--lambda0", "1,2", "--dt",
        "0.015625", "--seed", "5",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,lambda1,lambda2"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
        assert!(cols[1] <= cols[2], "unsorted row: {line}");
        rows += 1;
    }
    assert_eq!(rows, 65);
}

#[test]
fn simulate_exact_law_values_stay_nonpositive() {
    let out = run(&[
        "simulate", "--mode", "scalar", "--delta", "-0.5", "--x0", "0", "--exact-law", "--dt",
        "0.015625", "--seed", "9",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x"));
    for line in lines {
        let x: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(x <= 0.0, "positive value in {line}");
    }

    // The exact sampler is defined for delta < 0 from the origin only.
    let out = run(&[
        "simulate", "--mode", "scalar", "--delta", "0.5", "--x0", "0", "--exact-law",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn simulate_multi_path_runs_name_files_by_index() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("dump.csv");
    let out = besq()
        .args(["simulate", "--mode", "scalar", "--delta", "1.5", "--x0", "1", "--dt", "0.125"])
        .args(["--paths", "3", "--seed", "4", "--out", out_file.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out_file.exists());
    let p0 = std::fs::read(dir.path().join("dump.path0.csv")).unwrap();
    let p1 = std::fs::read(dir.path().join("dump.path1.csv")).unwrap();
    assert!(dir.path().join("dump.path2.csv").exists());
    assert_ne!(p0, p1, "paths must use distinct streams");

    // Several paths to stdout would interleave; rejected.
    let out = run(&[
        "simulate", "--mode", "scalar", "--delta", "1.5", "--x0", "1", "--dt", "0.125",
        "--paths", "2",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn seed_precedence_is_flag_env_config_default() {
    let dir = tempfile::tempdir().unwrap();
    let with_seed = dir.path().join("with_seed.cfg");
    let plain = dir.path().join("plain.cfg");
    let params = "delta = 1.5\nx0 = 1\ndt = 0.125\n";
    std::fs::write(&with_seed, format!("# seeded\nmaster_seed = 11\n{params}")).unwrap();
    std::fs::write(&plain, params).unwrap();

    let run_sim = |cfg: &Path, env: Option<&str>, seed: Option<&str>| -> String {
        let mut cmd = besq();
        cmd.args(["simulate", "--mode", "scalar", "--config", cfg.to_str().unwrap()]);
        if let Some(s) = seed {
            cmd.args(["--seed", s]);
        }
        if let Some(v) = env {
            cmd.env("BESQ_SEED", v);
        }
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };

    // Config seed is honored when nothing overrides it.
    assert_eq!(run_sim(&with_seed, None, None), run_sim(&plain, None, Some("11")));
    // Environment beats the file.
    assert_eq!(run_sim(&with_seed, Some("22"), None), run_sim(&plain, None, Some("22")));
    // Flag beats the environment.
    assert_eq!(run_sim(&with_seed, Some("22"), Some("33")), run_sim(&plain, None, Some("33")));
    // Nothing set falls back to the fixed default.
    assert_eq!(run_sim(&plain, None, None), run_sim(&plain, None, Some("42")));
    assert_ne!(run_sim(&with_seed, None, None), run_sim(&plain, None, None));

    let out = besq()
        .args(["simulate", "--mode", "scalar", "--delta", "1.5", "--x0", "1", "--dt", "0.125"])
        .env("BESQ_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_preset_passes() {
    let out = run(&["verify", "laplace", "--preset", "p2-a3"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("experiment laplace: pass"));
}

#[test]
fn verify_negativity_passes_in_the_subcritical_regime() {
    let out = run(&[
        "verify", "negativity", "-p", "2", "-a", "0.5", "--x0", "diag:1,2", "--paths", "400",
        "--dt", "0.00390625",
    ]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("negativity_fraction"));
}

#[test]
fn verify_names_the_violated_branches_on_bad_parameters() {
    let out = run(&["verify", "laplace", "-p", "2", "-a", "0.5", "--x0", "diag:1,1"]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("threshold"), "{err}");
    assert!(err.contains("discrete"), "{err}");
}

#[test]
fn verify_failed_verdict_exits_2() {
    // Collapse the agreement band to (essentially) zero so the verdict
    // must come out as a fail rather than an error.
    let out = run(&[
        "verify", "laplace", "-p", "2", "-a", "3", "--paths", "200", "--dt", "0.0625", "--seed",
        "1", "--set", "confidence=0.0001", "--set", "bias_allowance=0",
    ]);
    assert_eq!(code(&out), 2, "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("experiment laplace: fail"));
}

#[test]
fn verify_report_records_the_resolved_seed() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = besq()
        .args(["verify", "negativity-diagnostic", "-p", "2", "-a", "3", "--paths", "50"])
        .args(["--dt", "0.0078125", "--report-json", report.to_str().unwrap()])
        .env("BESQ_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&report);
    assert_eq!(v["rng"]["master_seed"], 77);
    assert_eq!(v["experiment"], "negativity-diagnostic");
}

#[test]
fn verify_config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    let report = dir.path().join("report.json");
    std::fs::write(
        &cfg,
        "# negativity run\np = 2\nalpha = 0.4\nx0 = diag:1,2\nn_paths = 300\ndt = 0.00390625\n",
    )
    .unwrap();
    let out = besq()
        .args(["verify", "negativity", "--config", cfg.to_str().unwrap()])
        .args(["-a", "0.6", "--report-json", report.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&report);
    assert_eq!(v["config"]["alpha"], 0.6);
    assert_eq!(v["config"]["n_paths"], 300);
}

#[test]
fn suite_runs_the_default_battery() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().join("reports");
    let out = besq()
        .args(["suite", "--seed", "42", "--out-dir", reports.to_str().unwrap()])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("suite: pass"), "{text}");
    let v = json(&reports.join("suite.json"));
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 7);
    assert!(reports.join("01-laplace.report.json").exists());
    assert!(reports.join("07-polynomial.report.json").exists());
}
