use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cpstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpstat"))
        .args(args)
        .env_remove("CPSTAT_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Non-comment lines of a CSV document.
fn data_lines(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let lines = data_lines(text);
    let idx = lines[0]
        .split(',')
        .position(|c| c == name)
        .expect("column present");
    lines[1..]
        .iter()
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn moments_rows_and_gamma() {
    let out = cpstat(&["moments", "--chi", "1", "--m-max", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let k: Vec<f64> = column(&text, "cumulant_s")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(k.len(), 2);
    assert_eq!(k[0], 1.0);
    assert!((k[1] - 50.0 / (33.0 * std::f64::consts::PI)).abs() < 1e-15);
    let gamma: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# gamma = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((gamma - (50.0 / (33.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-15);
    assert!((gamma - 0.6946).abs() < 2e-4);

    let single = stdout(&cpstat(&["moments", "--chi", "3", "--m-max", "1"]));
    assert_eq!(
        data_lines(&single),
        vec!["m,cumulant_s", "1,1.0000000000000000e0"]
    );
}

#[test]
fn every_file_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = cpstat(&[
        "sample",
        "--chi",
        "1",
        "--realizations",
        "300",
        "--seed",
        "11",
        "--raw-samples",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for (name, header) in [
        ("summary.csv", "statistic,value"),
        (
            "histogram.csv",
            "bin_lower,bin_upper,count,density,standard_error",
        ),
        ("samples.csv", "index,s"),
    ] {
        let text = read(&out_dir.join(name));
        assert!(text.starts_with("# cpstat "), "{name}");
        assert!(text.contains("# seed: 11"));
        assert!(text.contains("# rng: rand_chacha"));
        assert!(text.contains("# config: {"));
        assert_eq!(data_lines(&text)[0], header);
    }
    let sidecar: Value = serde_json::from_str(&read(&out_dir.join("config.json"))).unwrap();
    assert_eq!(sidecar["config"]["realizations"], 300);
    assert!(sidecar["workers"].as_u64().unwrap() >= 1);
    assert_eq!(data_lines(&read(&out_dir.join("samples.csv"))).len(), 301);
}

#[test]
fn sample_output_is_byte_identical_across_workers_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, workers) in ["1", "4", "16", "4"].iter().enumerate() {
        let out_dir = dir.path().join(format!("w{k}"));
        let out = cpstat(&[
            "sample",
            "--chi",
            "0.5",
            "--realizations",
            "2000",
            "--seed",
            "42",
            "--raw-samples",
            "--workers",
            workers,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        files.push(
            ["samples.csv", "histogram.csv", "summary.csv"]
                .map(|f| std::fs::read(out_dir.join(f)).unwrap()),
        );
    }
    for other in &files[1..] {
        assert!(files[0] == *other);
    }
}

#[test]
fn environment_supplies_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cpstat"))
        .args([
            "moments",
            "--chi",
            "1",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("CPSTAT_WORKERS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let sidecar: Value = serde_json::from_str(&read(&dir.path().join("config.json"))).unwrap();
    assert_eq!(sidecar["workers"], 3);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "chi = 2.0\nformat = \"json\"\n[moments]\nm_max = 3\n[pdf]\nm_max = 9\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file: Value =
        serde_json::from_str(&stdout(&cpstat(&["moments", "--config", cfg]))).unwrap();
    assert_eq!(from_file["config"]["chi"], 2.0);
    assert_eq!(from_file["rows"].as_array().unwrap().len(), 3);

    let overridden: Value = serde_json::from_str(&stdout(&cpstat(&[
        "moments", "--config", cfg, "--chi", "4", "--m-max", "2",
    ])))
    .unwrap();
    assert_eq!(overridden["config"]["chi"], 4.0);
    assert_eq!(overridden["rows"].as_array().unwrap().len(), 2);
    assert_eq!(overridden["schema_version"], 1);

    std::fs::write(dir.path().join("bad.toml"), "chii = 1.0\n").unwrap();
    let bad = cpstat(&[
        "moments",
        "--config",
        dir.path().join("bad.toml").to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(4));
}

#[test]
fn pdf_columns_and_regimes() {
    let out = cpstat(&[
        "pdf", "--chi", "40", "--s-min", "0.6", "--s-max", "1.4", "--points", "5", "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(
        data_lines(&text)[0],
        "s,p,error,regime,gaussian,moderate,lifshitz_tail,status"
    );
    assert!(column(&text, "regime").iter().all(|r| r == "gaussian"));
    assert!(column(&text, "status").iter().all(|r| r == "ok"));
    let p: Vec<f64> = column(&text, "p")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    let g: Vec<f64> = column(&text, "gaussian")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    // Same bell, shifted by the skewness of the exact density.
    let peak = g.iter().cloned().fold(0.0, f64::max);
    assert!(p.iter().zip(&g).all(|(a, b)| (a - b).abs() < 0.1 * peak));
}

#[test]
fn dimensional_inputs() {
    // χ = n z³ = 1 from dimensional inputs; the pair coefficient scales the
    // dimensional cumulants only.
    let out = cpstat(&[
        "moments", "--n", "8", "--z", "0.5", "--gamma7", "2", "--m-max", "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let ku: Vec<f64> = column(&text, "cumulant_u")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    let mean = -2.0 * std::f64::consts::PI * 8.0 * 2.0 / (20.0 * 0.5f64.powi(4));
    assert!((ku[0] / mean - 1.0).abs() < 1e-14);
    assert!(text.contains("# mean_potential = "));

    let conflict = cpstat(&["moments", "--chi", "2", "--n", "8", "--z", "0.5"]);
    assert_eq!(conflict.status.code(), Some(4));
    let partial = cpstat(&["gamma-curve", "--alpha0", "1e-30", "--realizations", "10"]);
    assert_eq!(partial.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&partial.stderr).contains("dimensional inputs accept"));
}

#[test]
fn gamma_curve_with_dimensional_columns() {
    let out = cpstat(&[
        "gamma-curve",
        "--chi-list",
        "0.5,2",
        "--realizations",
        "2000",
        "--n",
        "1",
        "--alpha0",
        "2",
        "--alpha-s",
        "3",
        "--hbar-c",
        "1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let theory: Vec<f64> = column(&text, "gamma_theory")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(theory[0] > theory[1]);
    let direct: Vec<f64> = column(&text, "mean_potential_theory")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    let effective: Vec<f64> = column(&text, "mean_potential_effective_medium")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    for (d, e) in direct.iter().zip(&effective) {
        assert!((d / e - 1.0).abs() < 1e-12);
    }
    for z in column(&text, "z_score") {
        assert!(z.parse::<f64>().unwrap().abs() < 5.0);
    }
}

#[test]
fn universality_between_pair_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let mut samples = Vec::new();
    for g in ["1", "10"] {
        let out_dir = dir.path().join(g);
        let out = cpstat(&[
            "sample",
            "--chi",
            "1",
            "--gamma7",
            g,
            "--realizations",
            "3000",
            "--raw-samples",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let s: Vec<f64> = column(&read(&out_dir.join("samples.csv")), "s")
            .iter()
            .map(|v| v.parse().unwrap())
            .collect();
        samples.push(s);
    }
    assert!(cpstat::montecarlo::ks_two_sample(&samples[0], &samples[1]).unwrap() <= 0.02);
}

#[test]
fn bad_input_exit_codes() {
    for args in [
        vec!["moments", "--chi", "-1"],
        vec!["moments", "--chi", "1", "--format", "xml"],
        vec!["moments"],
        vec!["pdf", "--chi", "1", "--spacing", "cubic"],
        vec!["sample", "--chi", "1", "--mode", "sphere"],
        vec!["sample", "--mode", "cube", "--cube-side", "12"],
        vec!["validate", "--level", "medium"],
        vec!["no-such-command"],
    ] {
        assert_eq!(cpstat(&args).status.code(), Some(4), "{args:?}");
    }
    assert_eq!(cpstat(&["--help"]).status.code(), Some(0));
}

#[test]
fn cube_mode_derives_chi() {
    let out = cpstat(&[
        "sample",
        "--mode",
        "cube",
        "--cube-side",
        "12",
        "--cube-n",
        "32",
        "--z",
        "1",
        "--realizations",
        "500",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("\"mode\":\"cube\""));
    let chi: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("chi,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((chi - 32.0 / 1728.0).abs() < 1e-15);
}

#[test]
fn validate_reports_every_check() {
    let out = cpstat(&["validate", "--level", "fast", "--format", "json"]);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    let all_passed = rows.iter().all(|r| r[2] == Value::Bool(true));
    // Exit status mirrors the report.
    assert_eq!(out.status.code(), Some(if all_passed { 0 } else { 2 }));
}

#[test]
fn unconverged_points_exit_with_convergence_code() {
    let out = cpstat(&[
        "pdf", "--chi", "100", "--s-min", "1e5", "--s-max", "1e5", "--points", "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // The table is still written, with the failure in the status column.
    let status = column(&stdout(&out), "status");
    assert!(status.iter().all(|s| s.starts_with("tolerance not met")));
}
