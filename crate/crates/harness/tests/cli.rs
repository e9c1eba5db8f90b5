use std::path::Path;
use std::process::{Command, Output};

fn bergman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman")).args(args).output().expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn interface_sweep_writes_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("interface.csv");
    let o = bergman(&[
        "interface", "--geometry", "bf", "--m", "1", "--E", "1", "--k", "100,400", "--beta", "-2..2:0.5", "--out",
        out.to_str().unwrap(), "--no-timestamp",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,beta,exact,erf_beta,erf_point,diff_beta,diff_point");
    assert_eq!(lines.count(), 18);
    let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join("interface.csv.meta.json"))).unwrap();
    assert!(meta.get("timestamp").is_none());
    assert!(meta["fitted_exponent"].as_f64().unwrap() < -0.3);
}

#[test]
fn charsum_three_routes_agree() {
    let o = bergman(&["charsum", "--k", "50", "--E", "0.35", "--w", "0.3"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "50");
    assert_eq!(row[1], "17");
    assert!(row[8].parse::<f64>().unwrap() < 1e-9);
}

#[test]
fn zeros_are_reproducible_and_echo_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = bergman(&[
            "zeros", "--geometry", "cpm", "--k", "30", "--E", "0.5", "--samples", "40", "--seed", "42", "--format",
            "json", "--out", out.to_str().unwrap(), "--no-timestamp",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read(&out)
    };
    let a = run("a.json");
    assert_eq!(a, run("a.json"));
    let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(doc["meta"]["seed"], 42);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 20);
    assert_eq!(doc["meta"]["summary"][0]["degree"], 14);
}

#[test]
fn timestamp_present_by_default() {
    let o = bergman(&["charsum", "--k", "10", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(doc["meta"]["timestamp"].is_u64());
}

#[test]
fn density_rows_serialize_log_values() {
    let o = bergman(&["density", "--k", "100", "--format", "json", "--no-timestamp"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &doc["rows"][0];
    assert_eq!(row["exact"]["sign"], 1);
    assert!((row["exact"]["value"].as_f64().unwrap() - 3.98610).abs() < 1e-5);
    assert!((row["ratio"].as_f64().unwrap() - 1.0).abs() < 5.0 / 100.0);
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# bulk sweep\ngeometry=bf\nk=200,800\nE=1\npoint=h=1.5\n").unwrap();
    let o = bergman(&["bulk", "--config", cfg.to_str().unwrap(), "--k", "200"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "200");
    assert!((row[1].parse::<f64>().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(row[2], "forbidden");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["density", "--geometry", "sphere"][..],
        &["density", "--k", "6000"][..],
        &["density", "--geometry", "cpm", "--k", "2500"][..],
        &["bulk", "--E", "abc"][..],
        &["zeros", "--geometry", "bf"][..],
        &["frobnicate"][..],
        &["density", "--config", "/nonexistent/file.cfg"][..],
    ] {
        let o = bergman(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let o = bergman(&["density", "--k", "6000"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("resource limit"));
}

#[test]
fn numeric_failure_exits_3() {
    // e^{β/√k} = e^{3000} overflows the flow map
    let o = bergman(&["density", "--k", "1", "--beta", "3000"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn report_subset_exit_code() {
    let o = bergman(&["report", "--criteria", "2,7", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("criterion 2 PASS"));
    assert!(err.contains("criterion 7 PASS"));
    let o = bergman(&["report", "--criteria", "6"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(["charsum", "--k", "10"])
        .env("BERGMAN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
