use std::path::Path;
use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifm-sim"))
        .env("RUST_LOG", "error")
        .env_remove("IFM_SIM_DEFAULT_CONFIG")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn interfere_csv_matches_closed_forms() {
    let o = sim(&["interfere"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(
        r[0],
        [
            "port",
            "probability",
            "closed_form",
            "e_ph",
            "e_m",
            "closed_form_e_ph",
            "closed_form_e_m"
        ]
    );
    assert_eq!(r.len(), 4);
    for row in &r[1..] {
        let (num, ana): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!((num - ana).abs() < 1e-9, "{row:?}");
    }
}

#[test]
fn json_output_has_columns_rows_and_report() {
    let o = sim(&["--format", "json", "compare"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cols = v["columns"].as_array().unwrap();
    assert_eq!(cols[0], "quantity");
    assert!(!v["rows"].as_array().unwrap().is_empty());
    assert!(v.get("report").is_some());
}

#[test]
fn precision_controls_significant_digits() {
    let o = sim(&["--set", "output.precision=6", "interfere"]);
    let r = rows(&stdout(&o));
    let mantissa = r[1][1].split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 6, "{}", r[1][1]);
}

#[test]
fn invalid_input_exits_one() {
    assert_eq!(
        sim(&["interfere", "--set", "params.tau=-3"]).status.code(),
        Some(1)
    );
    assert_eq!(
        sim(&["interfere", "--set", "params.unknown=3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        sim(&["weak-values", "--set", "output.precision=40"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(sim(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        sim(&["interfere", "--config", "/nonexistent.toml"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn tolerance_failure_exits_two() {
    // a coarse reservoir with a tight deviation bound cannot pass
    let o = sim(&[
        "oracle",
        "--set",
        "micro.n_reservoir_modes=40",
        "--set",
        "micro.half_band=20",
        "--set",
        "micro.max_deviation=1e-6",
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!o.stdout.is_empty());
}

#[test]
fn config_file_and_environment_layering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[params]\ntau = 5.0\n\n[output]\nprecision = 8\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let from_flag = stdout(&sim(&["--config", cfg_s, "interfere"]));
    let from_env = Command::new(env!("CARGO_BIN_EXE_ifm-sim"))
        .env("RUST_LOG", "error")
        .env("IFM_SIM_DEFAULT_CONFIG", &cfg)
        .arg("interfere")
        .output()
        .unwrap();
    assert_eq!(from_flag, stdout(&from_env));
    let p_dark: f64 = rows(&from_flag)[1][1].parse().unwrap();
    let e = (-2.5f64).exp();
    assert!((p_dark - (1.0 - e).powi(2) / 8.0).abs() < 1e-7);
    // --set wins over the file
    let over = stdout(&sim(&[
        "--config",
        cfg_s,
        "--set",
        "params.tau=20",
        "interfere",
    ]));
    let p_dark: f64 = rows(&over)[1][1].parse().unwrap();
    assert!((p_dark - (1.0 - (-10f64).exp()).powi(2) / 8.0).abs() < 1e-9);
}

#[test]
fn weak_values_rows_are_grouped_by_observable() {
    let o = sim(&[
        "weak-values",
        "--times",
        "11",
        "--set",
        "weak_values.observables=[\"Pi_I_0\",\"Pi_II\"]",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = rows(&stdout(&o));
    assert_eq!(
        r[0],
        ["t_Gamma", "observable_id", "re", "im", "anomalous_flag"]
    );
    assert_eq!(r.len(), 1 + 22);
    assert!(r[1..12].iter().all(|row| row[1] == "Pi_I_0"));
    assert!(r[12..].iter().all(|row| row[1] == "Pi_II"));
    let last: f64 = r[11][2].parse().unwrap();
    assert!((last + 0.5).abs() < 1e-3);
}

#[test]
fn engine_sampled_counts_sum_to_cycles() {
    let o = sim(&[
        "--seed", "3", "engine", "--mode", "sampled", "--cycles", "5000",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = rows(&stdout(&o));
    let w: f64 = r[1..]
        .iter()
        .map(|row| row[1].parse::<f64>().unwrap())
        .sum();
    assert_eq!(w, 5000.0);
    let other = stdout(&sim(&[
        "--seed", "4", "engine", "--mode", "sampled", "--cycles", "5000",
    ]));
    assert_ne!(stdout(&o), other);
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn sweep_writes_points_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = sim(&[
        "--out",
        out.to_str().unwrap(),
        "sweep",
        "--vary",
        "params.tau=5,10",
        "--vary",
        "params.omega_m=1,2",
        "interfere",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let index = rows(&read(&out.join("index.csv")));
    assert_eq!(
        index[0],
        ["point", "params.tau", "params.omega_m", "file", "status"]
    );
    assert_eq!(index.len(), 5);
    assert_eq!(index[2][1..3], ["5", "2"]);
    for row in &index[1..] {
        assert_eq!(row[4], "ok");
        assert!(out.join(&row[3]).exists());
    }
    let cfg = read(&out.join("point_0003.toml"));
    assert!(
        cfg.contains("tau = 10.0") && cfg.contains("omega_m = 2.0"),
        "{cfg}"
    );
    // same sweep again is byte-identical
    let again = dir.path().join("again");
    sim(&[
        "--out",
        again.to_str().unwrap(),
        "sweep",
        "--vary",
        "params.tau=5,10",
        "--vary",
        "params.omega_m=1,2",
        "interfere",
    ]);
    for i in 0..4 {
        let f = format!("point_{i:04}.csv");
        assert_eq!(read(&out.join(&f)), read(&again.join(&f)));
    }
}

#[test]
fn sweep_reports_worst_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = sim(&[
        "--out",
        out.to_str().unwrap(),
        "sweep",
        "--vary",
        "params.tau=5,-1",
        "interfere",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let index = rows(&read(&out.join("index.csv")));
    assert_eq!(index[1][3], "ok");
    assert!(index[2][3].starts_with("error"));
}

#[test]
fn every_subcommand_runs() {
    for args in [
        &["eigenstates"][..],
        &["eigenstates", "--wavefunctions"],
        &["fit"],
        &["evolve"],
        &["backward"],
        &["engine"],
    ] {
        let o = sim(args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(stdout(&o).lines().count() > 1, "{args:?}");
    }
}
