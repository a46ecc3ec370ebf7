use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn holonomy(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_holonomy"));
    cmd.args(args).env_remove("HOLONOMY_THREADS").env("RUST_LOG", "error");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const GOOD: &str = r#"
[[job]]
kind = "gates"
phase = 1.0

[[job]]
kind = "anyon"
nu = 0.5
radius = 2.0
"#;

#[test]
fn success_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "good.toml", GOOD);
    let out = holonomy(&["run", &cfg], &[("HOLONOMY_THREADS", "2")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["jobs"].as_array().unwrap().len(), 2);
}

#[test]
fn output_dir_gets_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "good.toml", GOOD);
    let out_dir = dir.path().join("out");
    let out = holonomy(&["--config", &cfg, "--output", out_dir.to_str().unwrap(), "--seed", "5", "run"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["jobs"][0]["job"]["seed"], 5);
}

#[test]
fn list_systems_succeeds() {
    let out = holonomy(&["list-systems"], &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("dark_5p1_restricted"));
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[[job]]\nkind = \"gates\"\nphase = \"x\"\nspin = 2\n");
    let out = holonomy(&["run", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("job[0].phase") && err.contains("job[0].spin"), "{err}");
}

#[test]
fn missing_file_exits_one() {
    let out = holonomy(&["run", "/nonexistent/jobs.toml"], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_thread_count_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "good.toml", GOOD);
    let out = holonomy(&["run", &cfg], &[("HOLONOMY_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn steps_override_out_of_range_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "good.toml", GOOD);
    let out = holonomy(&["--steps", "1", "run", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn degeneracy_change_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cross.toml",
        r#"
[[job]]
kind = "holonomy"
system = "two_level"
[job.path]
shape = "waypoints"
points = [[1.0, 0.0], [-1.0, 0.0], [1.0, 0.0]]
"#,
    );
    let out = holonomy(&["run", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenera"));
}

#[test]
fn window_splitting_cluster_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "split.toml",
        r#"
[[job]]
kind = "holonomy"
system = "dark_5p1_restricted"
indices = [1, 2]
[job.path]
shape = "sweep"
param = "theta3"
period = 1.0
"#,
    );
    let out = holonomy(&["run", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
