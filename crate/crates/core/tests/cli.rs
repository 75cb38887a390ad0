use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qmclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmclab"))
        .args(args)
        .env_remove("QMCLAB_DIRECTION_NUMBERS")
        .output()
        .expect("spawn qmclab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_experiment_is_rejected() {
    let o = qmclab(&["run", "--experiment", "fig9", "--out", "unused"]);
    assert!(!o.status.success());
    assert!(!Path::new("unused").exists());
}

#[test]
fn verify_passes_on_builtin_numbers() {
    let o = qmclab(&["verify", "--d", "3", "--m", "10"]);
    let out = stdout(&o);
    assert!(o.status.success(), "{out}");
    assert!(!out.contains("FAIL"), "{out}");
    assert!(out.contains("PASS net certificates"), "{out}");
}

#[test]
fn verify_catches_corrupted_direction_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/new-joe-kuo-6.50")).unwrap();
    let mut lines: Vec<String> = src.lines().map(String::from).collect();
    // Third dimension with m_2 = 1 instead of 3.
    lines[2] = "3\t2\t1\t1\t1".into();
    let path = dir.path().join("bad.txt");
    fs::write(&path, lines.join("\n") + "\n").unwrap();

    let o = Command::new(env!("CARGO_BIN_EXE_qmclab"))
        .args(["verify", "--d", "3", "--m", "10"])
        .env("QMCLAB_DIRECTION_NUMBERS", &path)
        .output()
        .unwrap();
    let out = stdout(&o);
    assert!(!o.status.success(), "{out}");
    assert!(out.contains("FAIL net certificates"), "{out}");
}

#[test]
fn netcount_streams_csv() {
    let o = qmclab(&["netcount", "--d", "2", "--m", "1..20"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("d,m,A,count,signed_scaled_error_exact,signed_scaled_error_float,bound_lo,bound_hi")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    assert!(rows[0].starts_with("2,1,1,"));
    assert!(rows[19].starts_with("2,20,"));
}

#[test]
fn netcount_resumes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let ps = p.to_str().unwrap();
    assert!(qmclab(&["netcount", "--d", "3", "--m", "1..8", "--out", ps]).status.success());
    assert!(qmclab(&["netcount", "--d", "3", "--m", "1..16", "--out", ps]).status.success());
    let resumed = fs::read_to_string(&p).unwrap();
    let fresh = stdout(&qmclab(&["netcount", "--d", "3", "--m", "1..16"]));
    assert_eq!(resumed, fresh);

    let o = qmclab(&["netcount", "--d", "2", "--m", "1..16", "--out", ps]);
    assert!(!o.status.success());
}

#[test]
fn rkhs_table_has_certificates() {
    let o = qmclab(&["rkhs", "--points", "halton", "--d", "2", "--n", "8,16", "--certificate"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("n,d,points,weights,wce"));
    for l in &lines[1..] {
        assert_eq!(l.split(',').count(), 13);
        assert!(l.ends_with(",1"), "{l}");
    }
}

#[test]
fn fig1_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1");
    let o = qmclab(&["run", "--experiment", "fig1-vdc", "--N", "1024", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["fig1_vdc_linear.csv", "fig1_vdc_indicator.csv", "plot_fig1_vdc.py", "manifest.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["experiment"], "fig1-vdc");
    assert_eq!(manifest["direction_numbers"], "builtin");
    assert_eq!(manifest["artifacts"].as_array().unwrap().len(), 2);
    let linear = fs::read_to_string(out.join("fig1_vdc_linear.csv")).unwrap();
    assert_eq!(linear.lines().count(), 1025);
}

#[test]
fn vdc_rejects_higher_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmclab(&[
        "run", "--experiment", "fig1-vdc", "--d", "2", "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
