//! The binary's exit codes, output formats and cache behaviour.

use std::path::Path;
use std::process::Command;

use stbranch_cli::{run, EXIT_OK, EXIT_USAGE};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stbranch"))
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn verify_pgl2_q3_passes() {
    let out = bin()
        .args(["verify", "--family", "pgl2", "--p", "3", "--n", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["pair"]["r"], 1);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["ok"] == true));
    assert_eq!(v["meta"]["seed"], 0);
    assert_eq!(v["meta"]["command"], "verify");
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        [
            "chartable_summary",
            "checks",
            "meta",
            "orbits",
            "pair",
            "rows",
            "special",
            "trivial_case"
        ]
    );
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify", "--family", "sl2", "--p", "2", "--n", "1"][..],
        &["verify", "--family", "gl3", "--p", "3"],
        &["report", "--family", "pgl2", "--p", "4"],
        &["report", "--family", "pgl2", "--p", "17"],
        &["report", "--family", "pgl2", "--p", "3", "--format", "xml"],
        &["report", "--family", "pgl2", "--p", "3", "--ell", "31"],
        &["report", "--family", "pgl2", "--p", "3", "--threads", "0"],
        &["nonsense"],
    ] {
        let mut argv = vec!["stbranch"];
        argv.extend_from_slice(args);
        assert_eq!(run(argv), EXIT_USAGE, "{args:?}");
    }
}

#[test]
fn max_q_raises_the_cap() {
    let out = bin()
        .args([
            "pair",
            "--family",
            "pgl2",
            "--p",
            "17",
            "--max-q",
            "17",
            "--max-order",
            "5000",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out.stdout)["r"], 1);
}

#[test]
fn sweep_three_qs() {
    let out = bin()
        .args(["sweep", "--families", "pgl2,sl2", "--q", "3,5,7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!(v["entries"].as_array().unwrap().len(), 6);
    assert_eq!(v["summary"]["all_ok"], true);
}

#[test]
fn sweep_with_a_bad_q_still_reports_the_rest() {
    let out = bin()
        .args(["sweep", "--families", "pgl2", "--q", "3,6,5,5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("duplicate"), "{stderr}");
    let v = json(&out.stdout);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert_eq!(entries[1]["q"], 5);
    assert!(entries[2]["error"].is_string());
}

#[test]
fn csv_and_markdown_formats() {
    let out = bin()
        .args(["report", "--family", "sl2", "--p", "5", "--format", "csv"])
        .output()
        .unwrap();
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("label,degree,lhs,t_1,st_flag,rhs,ok"));
    assert_eq!(csv.lines().count(), 1 + 9);

    let out = bin()
        .args(["report", "--family", "pgl2", "--p", "5", "--format", "md"])
        .output()
        .unwrap();
    let md = String::from_utf8(out.stdout).unwrap();
    assert!(md.contains("## Branching rows"));
    assert!(md.contains("reference value r - 1"));
}

#[test]
fn pair_and_chartable_commands() {
    let out = bin()
        .args(["pair", "--family", "sl2", "--p", "3", "--n", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    assert_eq!((v["x_size"].as_u64(), v["omega_size"].as_u64()), (Some(82), Some(72)));
    assert_eq!(v["orbits"][0]["stabilizer_order"], 10);

    let out = bin()
        .args(["chartable", "--family", "pgl2", "--p", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out.stdout);
    let degrees: Vec<u64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["degree"].as_u64().unwrap())
        .collect();
    assert_eq!(degrees, [1, 1, 2, 3, 3]);
    assert_eq!(v["orthogonality"], true);
}

fn timings(dir: &Path, via_env: bool) -> serde_json::Value {
    let mut cmd = bin();
    cmd.args(["report", "--family", "sl2", "--p", "5", "--timings"]);
    if via_env {
        cmd.env("STBRANCH_CACHE_DIR", dir);
    } else {
        cmd.arg("--cache-dir").arg(dir);
    }
    let out = cmd.output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    json(&out.stdout)
}

#[test]
fn cache_roundtrip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let first = timings(dir.path(), false);
    assert_eq!(first["meta"]["timings"]["cache_hit"], false);
    let second = timings(dir.path(), true);
    assert_eq!(second["meta"]["timings"]["cache_hit"], true);
    assert_eq!(first["rows"], second["rows"]);

    for entry in std::fs::read_dir(dir.path()).unwrap() {
        std::fs::write(entry.unwrap().path(), b"garbage").unwrap();
    }
    let third = timings(dir.path(), false);
    assert_eq!(third["meta"]["timings"]["cache_hit"], false);
    assert_eq!(first["rows"], third["rows"]);
}

#[test]
fn unwritable_cache_is_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"").unwrap();
    let out = bin()
        .args(["report", "--family", "pgl2", "--p", "3", "--cache-dir"])
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: cache"));
}

#[test]
fn timings_absent_by_default() {
    let out = bin().args(["report", "--family", "pgl2", "--p", "3"]).output().unwrap();
    assert!(json(&out.stdout)["meta"].get("timings").is_none());
}
