//! End-to-end checks of the binary: exit codes, flag overrides, and the
//! files a run leaves behind.

use std::path::Path;
use std::process::{Command, Output};

fn capgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capgame"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn clean_run_exits_zero_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = capgame(&[
        "--kind",
        "convergence",
        "--n",
        "10",
        "--rounds",
        "30",
        "--replicates",
        "2",
        "--scheme",
        "uniform",
        "--algo",
        "game_rwm",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("summary.csv").exists());
    assert!(dir.path().join("convergence_game_rwm_uniform.csv").exists());
    assert!(dir.path().join("runs/convergence_game_rwm_uniform_rep1.csv").exists());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("game_rwm uniform"));
    assert!(stdout.contains("wrote "));
}

#[test]
fn usage_and_config_errors_exit_one() {
    // Unknown flag.
    assert_eq!(code(&capgame(&["--bogus"])), 1);
    // Unparseable value.
    assert_eq!(code(&capgame(&["--n", "many"])), 1);
    // Unknown enum token.
    assert_eq!(code(&capgame(&["--scheme", "loud"])), 1);
    // Missing config file.
    assert_eq!(code(&capgame(&["--config", "/nonexistent/run.json"])), 1);
    // Contradictory settings: the fixed-threshold schedule needs alpha > 2.
    let out = capgame(&["--algo", "hw", "--alpha", "2.0", "--kind", "sweep_n", "--n", "8"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
    // Help is not an error.
    assert_eq!(code(&capgame(&["--help"])), 0);
}

#[test]
fn config_file_with_unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, r#"{"kind":"sweep_n","round":50}"#).unwrap();
    let out = capgame(&["--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("round"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(
        &path,
        r#"{"kind":"convergence","n":10,"rounds":20,"replicates":1,
            "schemes":["mean"],"algorithms":["game_rwm"],"seed":1}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("results");
    let out = capgame(&[
        "--config",
        path.to_str().unwrap(),
        "--seed",
        "9",
        "--scheme",
        "uniform",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text =
        std::fs::read_to_string(out_dir.join("convergence_game_rwm_uniform.csv")).unwrap();
    assert!(text.contains("# seed: 9"));
    assert!(text.contains("\"seed\":9"));
    assert!(text.contains("\"schemes\":[\"uniform\"]"));
}

fn write_verify_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_suite_exit_code_reports_failures() {
    // Ordinary sparse instances: every check passes.
    let dir = tempfile::tempdir().unwrap();
    let config = write_verify_config(
        dir.path(),
        r#"{"kind":"verify_suite","n":10,"rounds":200,"verify_instances":5,
            "schemes":["uniform"]}"#,
    );
    let out_dir = dir.path().join("ok");
    let out = capgame(&["--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("verify.csv").exists());

    // Two cramped links at a high threshold: the silenced link never sees
    // overload from its single interferer, so the failure-fraction check
    // reports a real violation and the run exits 2.
    let config = write_verify_config(
        dir.path(),
        r#"{"kind":"verify_suite","n":2,"world":2.0,"d_max":2.0,"rounds":500,
            "verify_instances":5,"schemes":["uniform"],
            "params":{"alpha":2.1,"beta":3.0}}"#,
    );
    let out_dir = dir.path().join("bad");
    let out = capgame(&["--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("check(s) failed"));
    let text = std::fs::read_to_string(out_dir.join("verify.csv")).unwrap();
    assert!(text.contains(",false,"));
}
