use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wgl(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgl"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("WGL_THREADS", "1")
        .output()
        .expect("run wgl")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn counting_selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgl(&["counting", "--selftest"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    let csv = read(dir.path(), "counting_measure.csv");
    assert!(csv.starts_with("T,N,C,sum,bound,ratio\r\n"));
    assert_eq!(csv.lines().count(), 21);
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "counting.json")).unwrap();
    assert_eq!(json["pass"], true);
}

#[test]
fn regime_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgl(&["constants", "--m", "1", "--n", "2", "--p", "5", "--source", "C2", "--N", "8"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert!(!dir.path().join("constants.csv").exists());
}

#[test]
fn schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(wgl(&["weyl", "--profile", "slow"], dir.path()).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"schema": 1, "command": "weyl", "params": {"q": [1]}, "seed": 0, "out_dir": "x", "version": "0"}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wgl")).arg("run").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgl(&["weyl", "--N", "64", "--tol", "weyl=1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("FAIL"));
}

#[test]
fn manifest_round_trip_through_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(wgl(&["weyl", "--N", "32", "--qmax", "4", "--seed", "9"], a.path()).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_wgl"))
        .arg("run")
        .arg(a.path().join("manifest.json"))
        .arg("--out")
        .arg(b.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(a.path(), "weyl.csv"), read(b.path(), "weyl.csv"));
    assert_eq!(read(a.path(), "weyl.json"), read(b.path(), "weyl.json"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = ["levelset", "--set", "fields=2", "--p", "4,6", "--seed", "42"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(wgl(&args, a.path()).status.code(), Some(0));
    // a different worker count must not change a byte
    let o = Command::new(env!("CARGO_BIN_EXE_wgl"))
        .args(args)
        .arg("--out")
        .arg(b.path())
        .env("WGL_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read(a.path().join("levelset_layer_cake.csv")).unwrap(),
        fs::read(b.path().join("levelset_layer_cake.csv")).unwrap()
    );
    let c = tempfile::tempdir().unwrap();
    wgl(&["levelset", "--set", "fields=2", "--p", "4,6", "--seed", "43"], c.path());
    assert_ne!(read(a.path(), "levelset_layer_cake.csv"), read(c.path(), "levelset_layer_cake.csv"));
}

fn without_wall_time(csv: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(csv.as_bytes());
    let col = r.headers().unwrap().iter().position(|h| h == "wall_time_s").unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().enumerate().filter(|(i, _)| *i != col).map(|(_, s)| s.to_string()).collect())
        .collect()
}

#[test]
fn accept_rerun_matches_outside_wall_time() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = wgl(&["accept", "--only", "1,7,12", "--seed", "5"], d.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    assert_eq!(
        without_wall_time(&read(a.path(), "acceptance.csv")),
        without_wall_time(&read(b.path(), "acceptance.csv"))
    );
    for name in ["c01_transforms.csv", "c07_weyl.csv", "c12_continuity.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn constants_example_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgl(&["constants", "--m", "1", "--n", "2", "--p", "4", "--N", "8,16,32", "--T", "1"], dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout).to_string();
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("N-slope"), "{stdout}");
    let csv = read(dir.path(), "constants.csv");
    assert!(csv.starts_with("m,n,p,T,N,ratio,err_est,wall_time_s\r\n"));
    assert_eq!(csv.lines().count(), 4);
}
