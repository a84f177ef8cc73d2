//! End-to-end runs of the `longbond` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn longbond(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longbond"))
        .args(args)
        .output()
        .unwrap()
}

fn run(cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    longbond(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes `text` as a config in a fresh temporary directory next to a copy of the scenario fixture.
fn temp_config(text: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("scenario.csv"), dir.path().join("scenario.csv")).unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    (dir, path)
}

fn classical_text() -> String {
    std::fs::read_to_string(fixture("classical.toml")).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn golden_outputs() {
    for family in ["classical", "poisson"] {
        for cmd in ["curve", "regime", "longbond"] {
            let out = run(cmd, &fixture(&format!("{family}.toml")), &[]);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{family} {cmd}: {}",
                stderr(&out)
            );
            assert_eq!(
                stdout(&out),
                golden(&format!("{family}_{cmd}.csv")),
                "{family} {cmd}"
            );
        }
    }
}

#[test]
fn curve_reports_long_rate_and_zero_maturity() {
    let rows = csv_rows(&stdout(&run("curve", &fixture("classical.toml"), &[])));
    assert_eq!(rows[1], ["bond", "0", "1", "0.05"]);
    assert_eq!(rows.last().unwrap()[0], "long_rate");
    assert_eq!(rows.last().unwrap()[3], "0.05375");
}

#[test]
fn longbond_matches_closed_form() {
    let rows = csv_rows(&stdout(&run("longbond", &fixture("classical.toml"), &[])));
    assert_eq!(rows[1][2], "1");
    // L_5 = exp(0.05375·5 + (0.05 − 0.04)/0.2) = e^{0.31875}.
    let l5: f64 = rows[3][2].parse().unwrap();
    assert!((l5 - 0.31875f64.exp()).abs() < 1e-11);
}

#[test]
fn regime_flags() {
    let ross = classical_text().replace("lambda = 0.5", "lambda = 0.05");
    let (_d, path) = temp_config(&ross);
    let rows = csv_rows(&stdout(&run("regime", &path, &[])));
    assert!(rows[1][3].parse::<f64>().unwrap().abs() < 1e-15);
    assert_eq!(rows[1][4], "Ross recovery holds");

    // R∞ = θ + λσ/k − σ²/2k² = 0 at θ = −0.02375.
    let boundary = classical_text().replace("theta = 0.03", "theta = -0.02375");
    let (_d, path) = temp_config(&boundary);
    let rows = csv_rows(&stdout(&run("regime", &path, &[])));
    assert_eq!(rows[1][1], "NotUiBoundary");
    assert_eq!(rows[1][2], "");

    let unbounded = classical_text().replace("theta = 0.03", "theta = -0.05");
    let (_d, path) = temp_config(&unbounded);
    assert_eq!(
        csv_rows(&stdout(&run("regime", &path, &[])))[1][1],
        "NotUiUnbounded"
    );
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let (_d, path) = temp_config(&classical_text().replace("k = 0.2", "k = -1"));
    let out = run("curve", &path, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`k`"), "{}", stderr(&out));

    let (_d, path) =
        temp_config(&classical_text().replace("sigma = 0.01", "sigma = 0.01\nsgima = 1"));
    let out = run("curve", &path, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("sgima") && stderr(&out).contains("line"),
        "{}",
        stderr(&out)
    );

    let (_d, path) = temp_config(&classical_text().replace("[0, 1, 5, 10]", "[1, 10, 5]"));
    assert_eq!(run("curve", &path, &[]).status.code(), Some(2));

    let out = run("curve", Path::new("/nonexistent/run.toml"), &[]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(longbond(&["curve"]).status.code(), Some(2));
    assert_eq!(longbond(&["bogus", "--config", "x"]).status.code(), Some(2));
}

#[test]
fn malformed_scenario_exits_2() {
    let text = classical_text().replace(
        "scenario.csv",
        &fixture("bad_scenario.csv").display().to_string(),
    );
    let (_d, path) = temp_config(&text);
    let out = run("longbond", &path, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let (dir, path) = temp_config(&classical_text());
    std::fs::write(dir.path().join("scenario.csv"), "time,rate\n0,0.05\n").unwrap();
    assert_eq!(run("longbond", &path, &[]).status.code(), Some(2));
}

#[test]
fn numeric_errors_exit_3() {
    // ψ(σ/k − λ) overflows for wide normal jumps at σ/k = 25.
    let text = std::fs::read_to_string(fixture("poisson.toml"))
        .unwrap()
        .replace("sigma = 0.05", "sigma = 5.0")
        .replace(
            "kind = \"compensated_poisson\"",
            "kind = \"compound_poisson_normal\"\njump_mean = 0.0\njump_stdev = 2.0",
        );
    let (_d, path) = temp_config(&text);
    let out = run("curve", &path, &[]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("bond pricing"), "{}", stderr(&out));
}

#[test]
fn csv_and_json_carry_the_same_values() {
    for cmd in ["curve", "regime", "longbond"] {
        let csv = stdout(&run(cmd, &fixture("poisson.toml"), &[]));
        let json: serde_json::Value = serde_json::from_str(&stdout(&run(
            cmd,
            &fixture("poisson.toml"),
            &["--format", "json"],
        )))
        .unwrap();
        assert_eq!(
            json["meta"]["config"]["model"]["driver"]["kind"],
            "compensated_poisson"
        );
        assert_eq!(json["meta"]["version"], env!("CARGO_PKG_VERSION"));
        let rows = csv_rows(&csv);
        let header = &rows[0];
        let json_rows = json["rows"].as_array().unwrap();
        assert_eq!(json_rows.len(), rows.len() - 1);
        for (row, obj) in rows[1..].iter().zip(json_rows) {
            for (col, field) in header.iter().zip(row) {
                let v = &obj[col.as_str()];
                match v {
                    serde_json::Value::Number(n) => {
                        let x = n.as_f64().unwrap();
                        // csv keeps 12 significant digits.
                        assert_eq!(
                            longbond_cli::output::format_sig(x, 12),
                            *field,
                            "{cmd} {col}"
                        );
                    }
                    serde_json::Value::Null => assert_eq!(field, ""),
                    serde_json::Value::String(s) => assert_eq!(s, field),
                    other => assert_eq!(other.to_string(), *field),
                }
            }
        }
    }
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("curve.json");
    let out = run(
        "curve",
        &fixture("classical.toml"),
        &["--format", "json", "--out", out_path.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(
        written,
        stdout(&run(
            "curve",
            &fixture("classical.toml"),
            &["--format", "json"]
        ))
    );
}

#[test]
fn simulation_is_byte_stable_across_runs_and_thread_counts() {
    let args = ["--seed", "2024", "--format", "json"];
    let a = run("simulate", &fixture("classical.toml"), &args);
    let b = Command::new(env!("CARGO_BIN_EXE_longbond"))
        .args([
            "simulate",
            "--config",
            fixture("classical.toml").to_str().unwrap(),
        ])
        .args(args)
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let json: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(json["meta"]["seed"], 2024);
    assert_eq!(json["meta"]["scheme"], "ExactGaussian");

    let c = run(
        "simulate",
        &fixture("classical.toml"),
        &["--seed", "2025", "--format", "json"],
    );
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn validate_passes_for_both_families() {
    for name in ["classical.toml", "poisson.toml"] {
        let out = run("validate", &fixture(name), &[]);
        assert_eq!(out.status.code(), Some(0), "{name}:\n{}", stdout(&out));
        let rows = csv_rows(&stdout(&out));
        assert!(rows[1..].iter().all(|r| r[5] == "true"));
        assert!(rows.iter().any(|r| r[0] == "bond_price T=10"));
    }
}

#[test]
fn zero_tolerance_validation_fails_with_exit_1() {
    let text = classical_text() + "\n[validate]\ntolerance_se = 0\nmartingale_tolerance_se = 0\n";
    let (_d, path) = temp_config(&text);
    let out = run("validate", &path, &[]);
    assert_eq!(out.status.code(), Some(1));
    // The report is still written.
    let rows = csv_rows(&stdout(&out));
    assert!(rows[1..]
        .iter()
        .any(|r| r[0].starts_with("bond_price") && r[5] == "false"));
}

#[test]
fn euler_scheme_validates_with_bias_allowance() {
    let text = std::fs::read_to_string(fixture("poisson.toml"))
        .unwrap()
        .replace("n_steps = 10", "n_steps = 200\nscheme = \"EulerLevy\"")
        .replace("n_paths = 100000", "n_paths = 20000");
    let (_d, path) = temp_config(&text);
    let out = run("validate", &path, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("martingale"));
}
