use std::path::Path;
use std::process::{Command, Output};

fn murel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_murel"))
        .args(args)
        .env_remove("MUREL_FORMAT")
        .env_remove("MUREL_HBAR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn distance_to_self_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "x,w\n-1,1\n0.5,2\n3,1\n");
    let v = json(&murel(&["wasserstein", &a, &a, "--exact"]));
    assert_eq!(v["distance"], 0.0);
    assert_eq!(v["lp_cost"], 0.0);
}

#[test]
fn distance_between_points() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "x,w\n0,1\n");
    let b = write(dir.path(), "b.csv", "x,w\n2.5,1\n");
    let v = json(&murel(&["wasserstein", &a, &b, "--alpha", "inf"]));
    assert_eq!(v["distance"], 2.5);
    assert_eq!(v["alpha"], "inf");
}

#[test]
fn errors_name_their_class_and_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "x,w\n0,1\n1,1\n");
    let out = murel(&["measure", &a, "--eps", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[domain]"));

    let out = murel(&["measure", &dir.path().join("missing.csv").to_string_lossy()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[io]"));

    let bad = write(dir.path(), "bad.csv", "position,weight\n0,1\n");
    let out = murel(&["measure", &bad]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[schema]"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(murel(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn csv_output_has_quantity_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "x,w\n0,1\n1,3\n");
    let out = murel(&["measure", &a, "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,value"));
    assert!(lines.any(|l| l == "mean,0.75"));
}

#[test]
fn out_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "x,w\n0,1\n1,1\n");
    let target = dir.path().join("result.json");
    std::fs::write(&target, "stale").unwrap();
    let out = murel(&["measure", &a, "--out", &target.to_string_lossy()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["mean"], 0.5);
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 2, "temporary file left behind");
}

#[test]
fn environment_sets_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.csv", "x,w\n0,1\n1,1\n");
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_murel"))
            .arg("measure")
            .arg(&a)
            .args(extra)
            .env("MUREL_FORMAT", "csv")
            .output()
            .unwrap()
    };
    assert!(String::from_utf8_lossy(&run(&[]).stdout).starts_with("quantity,value"));
    assert!(String::from_utf8_lossy(&run(&["--format", "json"]).stdout).starts_with('{'));
}

#[test]
fn ground_state_command_matches_library() {
    let v = json(&murel(&["groundstate", "--alpha", "1", "--beta", "1", "--points", "512"]));
    let grid = murel::verify::default_ground_grid(512).unwrap();
    let c = murel::verify::c_alpha_beta(1.0, 1.0, &grid).unwrap();
    assert!((v["c"].as_f64().unwrap() - c).abs() < 1e-9, "{} vs {c}", v["c"]);
}
