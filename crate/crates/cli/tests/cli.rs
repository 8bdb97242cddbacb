use std::path::Path;
use std::process::{Command, Output};

fn bsap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().skip(1).collect()
}

#[test]
fn sweep_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = bsap(&[
        "sweep",
        "--L",
        "4",
        "--grid",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(
        "jx_ratio,jy_ratio,parity,n,level_rank,steps,error,energy_estimate,wall_time_ms\n"
    ));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.ends_with(",0")));
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let one = bsap(&["sweep", "--L", "4", "--grid", "3", "--workers", "1"]);
    let two = bsap(&["sweep", "--L", "4", "--grid", "3", "--workers", "2"]);
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn prepare_appends_without_repeating_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("points.csv");
    let path = out.to_str().unwrap();
    for rank in ["0", "1"] {
        let o = bsap(&[
            "prepare",
            "--L",
            "6",
            "--level-n",
            "1",
            "--level-rank",
            rank,
            "--parity",
            "-1",
            "--jx-ratio",
            "0.3",
            "--jy-ratio",
            "0.2",
            "--out",
            path,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.matches("jx_ratio").count(), 1);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0.3,0.2,-1,1,0,"));
    assert!(rows[1].starts_with("0.3,0.2,-1,1,1,"));
}

#[test]
fn json_bundle_echoes_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("bundle.json");
    let o = bsap(&[
        "ap-baseline",
        "--L",
        "4",
        "--grid",
        "2",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["config"]["L"], 4);
    assert_eq!(v["config"]["method"], "ap-baseline");
    assert_eq!(v["records"].as_array().unwrap().len(), 4);
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"L": 4, "grid_points": 5}"#).unwrap();
    let o = bsap(&["sweep", "--config", cfg.to_str().unwrap(), "--grid", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&stdout(&o)).len(), 4);
}

#[test]
fn spectrum_emits_the_flow_table() {
    let o = bsap(&[
        "spectrum",
        "--L",
        "4",
        "--s-points",
        "3",
        "--jx-ratio",
        "0.4",
        "--jy-ratio",
        "0.5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("s,eigenvalue_index,eigenvalue,cluster_id\n"));
    assert_eq!(data_rows(&text).len(), 3 * 16);
}

#[test]
fn invalid_input_exits_with_two() {
    for args in [
        &["sweep", "--L", "5"][..],
        &["sweep", "--L", "4", "--grid", "0"],
        &["prepare", "--L", "4", "--parity", "2"],
        &["prepare", "--L", "6", "--level-n", "2"],
        &["prepare", "--L", "4", "--jx-ratio", "1.5"],
    ] {
        assert_eq!(bsap(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"L": 4, "bogus": 1}"#).unwrap();
    assert_eq!(
        bsap(&["sweep", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oversized_register_exits_with_three() {
    let o = bsap(&["sweep", "--L", "14"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!Path::new("sweep.csv").exists());
}
