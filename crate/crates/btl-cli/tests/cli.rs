//! End-to-end tests of the binary: exit codes, file handling, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn btl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn workspace_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("btl-cli-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn constants_all_ones() {
    let out = btl(&["constants", "--model", "builtin:all-ones-n2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("c_12 = 1.000000000000"), "{text}");
    assert!(text.contains("C_2 = 1.000000000000"));
    assert!(text.contains("D_1 = 1.000000000000"));
}

#[test]
fn validate_model_file_roundtrip() {
    let out = btl(&[
        "validate",
        "--model",
        workspace_file("models/small-support-n2.json").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn noncritical_model_exits_2_naming_criticality() {
    let out = btl(&[
        "validate",
        "--model",
        workspace_file("models/supercritical-example.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("criticality"), "{err}");
    assert!(err.contains("m_{1,1}"), "{err}");
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = temp_dir("malformed");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{ \"N\": 2, \"types\": [ { \"type\": 1 ").unwrap();
    let out = btl(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn repair_writes_critical_model() {
    let dir = temp_dir("repair");
    let repaired = dir.join("repaired.json");
    let out = btl(&[
        "validate",
        "--model",
        workspace_file("models/supercritical-example.json").to_str().unwrap(),
        "--repair-out",
        repaired.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = btl(&["validate", "--model", repaired.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn unknown_builtin_exits_2() {
    let out = btl(&["constants", "--model", "builtin:nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("available"));
}

#[test]
fn reduced_law_prints_values() {
    let out = btl(&[
        "--model",
        "builtin:small-support-n2",
        "reduced-law",
        "-m",
        "3",
        "-n",
        "6",
        "--probe",
        "0.5,0.5",
        "--probe",
        "1,1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("J(m=3, n=6"), "{text}");
    // The probe at all-ones must print 1.
    assert!(text.contains("= 1.000000000000"), "{text}");
}

#[test]
fn yaglom_check_passes_and_exits_0() {
    let out = btl(&[
        "--model",
        "builtin:all-ones-n2",
        "yaglom",
        "-n",
        "2000",
        "--lambdas",
        "1",
        "--tolerance",
        "0.05",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("[PASS]"));
}

#[test]
fn failing_tolerance_exits_1() {
    // An absurdly tight tolerance at a small horizon must fail the check
    // (exit 1), distinct from usage errors (exit 2).
    let out = btl(&[
        "--model",
        "builtin:all-ones-n2",
        "yaglom",
        "-n",
        "64",
        "--lambdas",
        "1",
        "--tolerance",
        "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("[FAIL]"));
}

#[test]
fn simulate_dump_format_and_determinism() {
    let dir = temp_dir("simdump");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        let out = btl(&[
            "--model",
            "builtin:small-support-n2",
            "simulate",
            "-n",
            "16",
            "--runs",
            "300",
            "--seed",
            "7",
            "--dump",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let text_a = std::fs::read_to_string(&a).unwrap();
    let text_b = std::fs::read_to_string(&b).unwrap();
    assert_eq!(text_a, text_b);
    assert!(text_a.starts_with("run_id,n,survived,beta,zeta,zN_over_bn\n"));
    assert_eq!(text_a.lines().count(), 301);
}

#[test]
fn mrca_mc_reports_are_byte_identical_across_threads() {
    let dir = temp_dir("mrcamc");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for (path, threads) in [(&a, "1"), (&b, "2")] {
        let out = btl(&[
            "--model",
            "builtin:mrca-binary-n2",
            "--threads",
            threads,
            "mrca-mc",
            "-n",
            "256",
            "--samples",
            "400",
            "--seed",
            "11",
            "--tolerance",
            "1",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let text_a = std::fs::read_to_string(&a).unwrap();
    let text_b = std::fs::read_to_string(&b).unwrap();
    // The embedded config records the thread count; everything else (all
    // sampled statistics) must agree bit for bit.
    let ja: serde_json::Value = serde_json::from_str(&text_a).unwrap();
    let jb: serde_json::Value = serde_json::from_str(&text_b).unwrap();
    assert_eq!(ja["reports"], jb["reports"]);
    assert!(dir.join("a.csv").exists());
}

#[test]
fn unchecked_simulation_accepts_degenerate_models() {
    let dir = temp_dir("unchecked");
    let path = dir.join("line.json");
    std::fs::write(
        &path,
        r#"{ "N": 2, "types": [
            { "type": 1, "pmf": [ { "vec": [1, 0], "p": 1.0 } ] },
            { "type": 2, "pmf": [ { "vec": [0, 1], "p": 1.0 } ] } ] }"#,
    )
    .unwrap();
    // Zero own-type variance: validation refuses it...
    let out = btl(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // ...but the simulator takes it with --unchecked; the deterministic
    // line survives every run.
    let out = btl(&[
        "--model",
        path.to_str().unwrap(),
        "simulate",
        "-n",
        "8",
        "--runs",
        "50",
        "--unchecked",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("50/50 runs survived"));
}

#[test]
fn verify_all_subset_is_deterministic_and_writes_reports() {
    let dir1 = temp_dir("verify1");
    let dir2 = temp_dir("verify2");
    for dir in [&dir1, &dir2] {
        let out = btl(&[
            "verify-all",
            "--seed",
            "7",
            "--criteria",
            "1",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).contains("[PASS] criterion 1"));
    }
    let a = std::fs::read(dir1.join("acceptance_report.json")).unwrap();
    let b = std::fs::read(dir2.join("acceptance_report.json")).unwrap();
    assert_eq!(a, b);
    let csv = std::fs::read_to_string(dir1.join("acceptance_report.csv")).unwrap();
    assert!(csv.starts_with("experiment,model,horizons,point"));
    assert!(!csv.contains(".tmp"));
}
