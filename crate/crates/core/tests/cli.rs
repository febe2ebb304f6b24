use std::path::PathBuf;
use std::process::{Command, Output};

fn noma_ssr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-ssr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("noma-ssr-{}-{name}", std::process::id()))
}

#[test]
fn pmin_running_instance() {
    let out = noma_ssr(&["pmin", "--gains", "1,4", "--qos", "1,1", "--noise", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("p_min: 1.5 W"), "{}", stdout(&out));

    let out = noma_ssr(&[
        "pmin", "--gains", "1,4", "--qos", "1,1", "--noise", "1", "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["p_min_w"], 1.5);
    assert_eq!(v["per_user_powers_w"], serde_json::json!([1.25, 0.25]));
}

#[test]
fn pmin_zero_qos() {
    let out = noma_ssr(&[
        "pmin", "--gains", "1,4", "--qos", "0", "--noise", "1", "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["p_min_w"], 0.0);
}

#[test]
fn missing_flag_is_usage_error() {
    let out = noma_ssr(&["pmin", "--gains", "1,4", "--noise", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--qos"));
    assert_eq!(noma_ssr(&["pmin", "--bogus"]).status.code(), Some(2));
}

#[test]
fn malformed_input_is_rejected() {
    let out = noma_ssr(&["pmin", "--gains", "4,1", "--qos", "1", "--noise", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("sorted"));
    let out = noma_ssr(&["pmin", "--gains", "1,x", "--qos", "1", "--noise", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn allocate_running_instance() {
    let out = noma_ssr(&[
        "allocate",
        "--gains",
        "1,4",
        "--qos",
        "1,1",
        "--noise",
        "1",
        "--power",
        "3",
        "--eve-gain",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("gamma: 0.666667, 0.333333"), "{text}");
    assert!(text.contains("ssr: 0.736966"), "{text}");
    assert!(text.contains("active set: pass"), "{text}");
}

#[test]
fn allocate_json_fields() {
    let out = noma_ssr(&[
        "allocate",
        "--gains",
        "1,4",
        "--qos",
        "1,1",
        "--noise",
        "1",
        "--power",
        "3",
        "--eve-gain",
        "2",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["gamma", "rates", "ssr", "report"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!((v["ssr"].as_f64().unwrap() - 0.736_965_594_166_206).abs() < 1e-12);
    assert_eq!(v["report"]["pass"], true);
    assert_eq!(v["rates"]["m_e"], 1);
}

#[test]
fn allocate_below_p_min() {
    let out = noma_ssr(&[
        "allocate", "--gains", "1,4", "--qos", "1,1", "--noise", "1", "--power", "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("1.5 W"), "{}", stderr(&out));
}

#[test]
fn config_file_with_flag_override() {
    let path = temp_path("config.json");
    std::fs::write(
        &path,
        r#"{"user_gains": [1.0, 4.0], "qos": [1.0, 1.0], "noise_power": 1.0, "total_power": 1.0, "eve_gain": 2.0}"#,
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    // File alone: 1 W is infeasible.
    assert_eq!(
        noma_ssr(&["--config", cfg, "allocate"]).status.code(),
        Some(3)
    );
    // Flag wins over the file.
    let out = noma_ssr(&["--config", cfg, "allocate", "--power", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("gamma: 0.666667, 0.333333"));

    std::fs::write(&path, r#"{"not_a_field": 1}"#).unwrap();
    assert_eq!(noma_ssr(&["--config", cfg, "pmin"]).status.code(), Some(2));
    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_csv_shape_and_determinism() {
    let args = [
        "sweep", "--var", "power", "--start", "0", "--stop", "40", "--step", "5", "--users",
        "2,3,4", "--trials", "500",
    ];
    let a = noma_ssr(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = noma_ssr(&args);
    assert_eq!(a.stdout, b.stdout);

    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("sweep_var,sweep_value,m,scheme,mean_ssr,infeasible_count,n_trials,seed")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3 * 2 * 9);
    assert_eq!(
        rows[0].split(',').take(4).collect::<Vec<_>>(),
        ["power_dbm", "0", "2", "noma"]
    );
    assert!(rows[1].starts_with("power_dbm,0,2,oma,"));
    assert!(
        rows.iter().all(|r| r.ends_with(",500,0")),
        "default seed is 0"
    );
    assert!(!text.contains('\r'));
}

#[test]
fn sweep_writes_file_and_honours_seed() {
    let path = temp_path("sweep.csv");
    let out = noma_ssr(&[
        "--seed",
        "9",
        "sweep",
        "--var",
        "qos",
        "--values",
        "1,2",
        "--users",
        "2",
        "--trials",
        "50",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert!(csv
        .lines()
        .skip(1)
        .all(|r| r.starts_with("qos,") && r.ends_with(",50,9")));
    std::fs::remove_file(&path).ok();
}

#[test]
fn qos_sweep_tail_goes_to_zero() {
    let out = noma_ssr(&[
        "sweep",
        "--var",
        "qos",
        "--start",
        "0.5",
        "--stop",
        "6",
        "--step",
        "0.5",
        "--users",
        "3,4",
        "--power-dbm",
        "20",
        "--trials",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let tails: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("qos,6,") && l.contains(",noma,"))
        .collect();
    assert_eq!(tails.len(), 2);
    for row in tails {
        let mean: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!(mean < 0.05, "{row}");
    }
}

#[test]
fn sweep_rejects_bad_ranges() {
    let out = noma_ssr(&["sweep", "--var", "qos", "--values", "2,1", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = noma_ssr(&["sweep", "--var", "qos", "--values", "1", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_by_default() {
    let out = noma_ssr(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("all checks passed"));
}

#[test]
fn verify_detects_perturbation() {
    let out = noma_ssr(&[
        "verify",
        "--instances",
        "40",
        "--perturb-gamma",
        "0.01",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
    let dominance = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "grid_dominance")
        .unwrap();
    assert!(dominance["failed"].as_u64().unwrap() > 0);
}

#[test]
fn verify_refuses_large_grids() {
    let out = noma_ssr(&["verify", "--users", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("limited to 4 users"));
}
