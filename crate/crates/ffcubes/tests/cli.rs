use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ffcubes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffcubes"))
        .args(args)
        .output()
        .expect("spawn ffcubes")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ffcubes-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// The manifest line printed on stderr when no `--out` is given.
fn manifest(o: &Output) -> Value {
    let err = stderr(o);
    let line = err
        .lines()
        .find_map(|l| l.strip_prefix("manifest: "))
        .expect("manifest line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn waring_csv_columns_and_values() {
    let o = ffcubes(&["waring", "--csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["Y", "sing_series_partial", "R_n", "prediction", "ratio"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| &r[2] == "32256"));
}

#[test]
fn delta_verify_sides_agree() {
    let o = ffcubes(&["delta-verify", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = &v["rows"][0];
    assert_eq!(row["lhs"], row["rhs"]);
    assert_eq!(row["lhs"], "2");
    assert_eq!(row["equal"], "true");
    assert!(v["failure"].is_null());
    assert_eq!(manifest(&o)["status"], "ok");
}

#[test]
fn injected_fault_is_caught_with_witness() {
    let o = ffcubes(&[
        "audit",
        "--family",
        "sr-check",
        "--inject-fault",
        "sr-closed",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let w = &v["failure"]["witness"];
    assert_ne!(w["brute"], w["closed"]);
    assert!(stderr(&o).contains("witness:"));
    assert_eq!(manifest(&o)["status"], "assertion-failed");
}

#[test]
fn clean_audit_passes() {
    let o = ffcubes(&["audit", "--family", "sr-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn exit_codes() {
    assert_eq!(ffcubes(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(ffcubes(&["count", "--q", "6"]).status.code(), Some(64));
    assert_eq!(
        ffcubes(&["count", "--b-max", "3", "--budget", "1000"])
            .status
            .code(),
        Some(2)
    );
    let missing = scratch("missing").join("absent.conf");
    assert_eq!(
        ffcubes(&["count", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(74)
    );
    assert_eq!(ffcubes(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_count_does_not_change_output() {
    let one = ffcubes(&["msum", "--b-max", "3", "--csv", "--threads", "1"]);
    let four = ffcubes(&["msum", "--b-max", "3", "--csv", "--threads", "4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(
        manifest(&one)["output"]["sha256"],
        manifest(&four)["output"]["sha256"]
    );
}

#[test]
fn flags_override_config_file() {
    let dir = scratch("config");
    let conf = dir.join("run.conf");
    std::fs::write(&conf, "# count settings\nb-max = 2\nform = 1,1,1,1\n").unwrap();
    let from_file = ffcubes(&["count", "--csv", "--config", conf.to_str().unwrap()]);
    let overridden = ffcubes(&[
        "count",
        "--csv",
        "--config",
        conf.to_str().unwrap(),
        "--b-max",
        "1",
    ]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    assert_eq!(manifest(&from_file)["config"]["b-max"], "2");
    assert_eq!(manifest(&overridden)["config"]["b-max"], "1");
    assert_eq!(stdout(&from_file).lines().count(), 3);
    assert_eq!(stdout(&overridden).lines().count(), 2);
}

#[test]
fn out_writes_output_and_manifest() {
    let dir = scratch("out");
    let out = dir.join("lines.json");
    let o = ffcubes(&[
        "lines",
        "--b-max",
        "1",
        "--json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let body = std::fs::read_to_string(&out).unwrap();
    let m: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("lines.json.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(m["command"], "lines");
    assert_eq!(m["output"]["bytes"], body.len());
    assert_eq!(m["config"]["b-max"], "1");
    assert!(m["config"].get("out").is_none());
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["command"], "lines");
}
