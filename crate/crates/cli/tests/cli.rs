use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bbtherm"))
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_config(json: &str, cmd: &str, extra: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "config.json", json);
    let mut args = vec![cmd, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout_ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// CSV body as header-keyed rows.
fn rows(csv_text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            headers
                .iter()
                .zip(r.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn close_to_printed(value: &str, printed: &str) -> bool {
    let decimals = printed.split('.').nth(1).map_or(0, str::len);
    (num(value) - num(printed)).abs() <= 10f64.powi(-(decimals as i32)) * (1.0 + 1e-9)
}

#[test]
fn single_uniform_spin_csv() {
    let out = run_config(
        r#"{"family": "free_spins_uniform", "n": 1, "beta": 1.0, "methods": ["lba_analytic"],
            "record_timing": false}"#,
        "analyze",
        &[],
    );
    let text = stdout_ok(&out);
    assert_eq!(
        text,
        "n,method,beta,gamma,field,tau_p,tau_q,tau,zero_multiplicity,wall_seconds\n\
         1,lba_analytic,1.0000,1.0000,1.0000,0.047600,0.095199,0.095199,,\n"
    );
}

#[test]
fn analyze_output_is_deterministic() {
    let json = r#"{"family": "free_spins_modulated", "n": [1, 2, 3, 4], "beta": 1.0,
                   "methods": ["qome", "lba_numeric", "lba_analytic"], "record_timing": false}"#;
    let first = stdout_ok(&run_config(json, "analyze", &[]));
    let second = stdout_ok(&run_config(json, "analyze", &[]));
    assert_eq!(first, second);
    let json_a = stdout_ok(&run_config(json, "analyze", &["--format", "json"]));
    let json_b = stdout_ok(&run_config(json, "analyze", &["--format", "json"]));
    assert_eq!(json_a, json_b);
}

#[test]
fn modulated_spins_reproduce_reference_values() {
    // (N, LBA tauP, LBA tauQ, QOME tauQ); QOME tauP equals LBA tauP
    let expected = [
        (1, "0.04760", "0.09520", "0.09520"),
        (2, "0.04760", "0.07493", "0.09520"),
        (3, "0.21406", "0.13016", "0.42813"),
        (4, "0.21406", "0.09589", "0.42813"),
        (5, "0.21406", "0.07560", "0.42813"),
        (6, "0.22800", "0.06989", "0.45600"),
    ];
    let text = stdout_ok(&run_config(
        r#"{"family": "free_spins_modulated", "n": [1, 2, 3, 4, 5, 6], "beta": 1.0,
            "methods": ["lba_analytic", "lba_numeric", "qome"], "record_timing": false}"#,
        "analyze",
        &[],
    ));
    let rows = rows(&text);
    assert_eq!(rows.len(), 18);
    for (i, (n, p, q, qq)) in expected.into_iter().enumerate() {
        for r in &rows[3 * i..3 * i + 3] {
            assert_eq!(num(&r["n"]) as usize, n);
            let tau_q = if r["method"] == "qome" { qq } else { q };
            assert!(close_to_printed(&r["tau_p"], p), "{r:?}");
            assert!(close_to_printed(&r["tau_q"], tau_q), "{r:?}");
        }
        assert_eq!(rows[3 * i + 2]["zero_multiplicity"], "1");
    }
}

#[test]
fn beta_sweep_follows_tanh() {
    let text = stdout_ok(&run_config(
        r#"{"family": "free_spins_uniform", "n": 1, "methods": ["lba_analytic"],
            "record_timing": false, "grid": {"beta": [2.0, 0.5, 1.0]}}"#,
        "sweep",
        &["--format", "json"],
    ));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["grid_key"], "beta");
    let records = v["records"].as_array().unwrap();
    let betas: Vec<f64> = records
        .iter()
        .map(|r| r["beta"].as_f64().unwrap())
        .collect();
    assert_eq!(betas, [0.5, 1.0, 2.0]);
    for r in records {
        let beta = r["beta"].as_f64().unwrap();
        let tau_p = r["tau_p"].as_f64().unwrap();
        assert!((tau_p - beta.tanh() / 16.0).abs() < 1e-14, "{r}");
        assert!((r["tau_q"].as_f64().unwrap() - 2.0 * tau_p).abs() < 1e-14);
    }
}

#[test]
fn field_sweep_scales_with_cube_of_field() {
    let text = stdout_ok(&run_config(
        r#"{"family": "free_spins_uniform", "n": 1, "beta": 1.0, "methods": ["lba_analytic"],
            "record_timing": false, "grid": {"field": [1.0, 0.5]}}"#,
        "sweep",
        &["--format", "json"],
    ));
    let v: Value = serde_json::from_str(&text).unwrap();
    let r = v["records"].as_array().unwrap();
    let (half, one) = (&r[0], &r[1]);
    assert_eq!(half["field"].as_f64(), Some(0.5));
    let ratio = half["tau_p"].as_f64().unwrap() / one["tau_p"].as_f64().unwrap();
    let expected = 8.0 * 0.5f64.tanh() / 1f64.tanh();
    assert!(
        (ratio - expected).abs() < 1e-12 * expected,
        "{ratio} vs {expected}"
    );
}

#[test]
fn json_reports_match_schema() {
    let schema: Value = serde_json::from_str(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/schema/report.schema.json"
        ))
        .unwrap(),
    )
    .unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let reports = [
        run_config(
            r#"{"family": "free_spins_modulated", "n": [1, 2, 3], "beta": 1.0,
                "methods": ["lba_analytic", "lba_numeric", "qome"], "format": "json"}"#,
            "analyze",
            &[],
        ),
        run_config(
            r#"{"family": "custom_hamiltonian", "n": [1, 2], "beta": 0.7, "seed": 4,
                "hamiltonian": {"dim": 2, "re": [[0.3, -1], [-1, -0.3]], "im": [[0, 0.2], [-0.2, 0]]},
                "methods": ["lba_analytic", "qome"], "format": "json"}"#,
            "analyze",
            &[],
        ),
        run_config(
            r#"{"family": "free_spins_uniform", "n": [1, 2], "methods": ["qome"],
                "grid": {"beta": [0.5, 1.5]}}"#,
            "sweep",
            &["--format", "json"],
        ),
    ];
    for out in &reports {
        let v: Value = serde_json::from_str(&stdout_ok(out)).unwrap();
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}\n{v}");
    }
}

#[test]
fn output_path_from_flag_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_config.csv");
    let config = format!(
        r#"{{"family": "free_spins_uniform", "beta": 1.0, "methods": ["lba_analytic"],
             "output": {:?}}}"#,
        target.to_str().unwrap()
    );
    let path = write_config(dir.path(), "c.json", &config);
    let out = run(&["analyze", "--config", path.to_str().unwrap()]);
    assert!(stdout_ok(&out).is_empty());
    assert!(std::fs::read_to_string(&target)
        .unwrap()
        .starts_with("n,method"));

    let flag = dir.path().join("from_flag.json");
    let out = run(&[
        "analyze",
        "--config",
        path.to_str().unwrap(),
        "--out",
        flag.to_str().unwrap(),
        "--format",
        "json",
    ]);
    stdout_ok(&out);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(flag).unwrap()).unwrap();
    assert_eq!(v["command"], "analyze");
}

#[test]
fn configuration_errors_exit_with_2() {
    let cases = [
        r#"{"family": "free_spins_uniform", "methods": ["qome"], "grid": {"beta": []}}"#,
        r#"{"family": "free_spins_uniform", "methods": ["qome"], "beta": -1.0}"#,
        r#"{"family": "free_spins_uniform", "methods": [], "beta": 1.0}"#,
        r#"{"family": "free_spins_uniform", "methods": ["qome"], "beta": 1.0, "bogus": 1}"#,
        r#"{"family": "custom_hamiltonian", "methods": ["qome"], "beta": 1.0}"#,
        r#"not json"#,
    ];
    for (i, json) in cases.iter().enumerate() {
        let cmd = if i == 0 { "sweep" } else { "analyze" };
        let out = run_config(json, cmd, &[]);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{json}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty());
    }
    let missing = run(&["analyze", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn cap_violations_exit_with_3() {
    let qome = run_config(
        r#"{"family": "free_spins_uniform", "n": 7, "beta": 1.0, "methods": ["qome"]}"#,
        "analyze",
        &[],
    );
    assert_eq!(
        qome.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&qome.stderr)
    );

    let numeric = run_config(
        r#"{"family": "free_spins_modulated", "n": 5, "beta": 1.0, "methods": ["lba_numeric"],
            "caps": {"numeric": 16}}"#,
        "analyze",
        &[],
    );
    assert_eq!(
        numeric.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&numeric.stderr)
    );
}

#[test]
fn degenerate_custom_hamiltonian_fails_lba_with_1() {
    let out = run_config(
        r#"{"family": "custom_hamiltonian", "beta": 1.0, "methods": ["lba_analytic"],
            "hamiltonian": {"dim": 2, "re": [[1, 0], [0, 1]]}}"#,
        "analyze",
        &[],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn table1_layout_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table1.csv");
    stdout_ok(&run(&[
        "table1",
        "--max-qome-n",
        "6",
        "--no-timing",
        "--out",
        path.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(
        "N,lba_tauP,lba_tauQ,lba_num_tauP,lba_num_tauQ,lba_cpu_s,qome_tauP,qome_tauQ,qome_cpu_s,warnings\n"
    ));
    let rows = rows(&text);
    let ns: Vec<usize> = rows.iter().map(|r| num(&r["N"]) as usize).collect();
    let mut expected_ns: Vec<usize> = (1..=13).collect();
    expected_ns.extend([100, 1000, 10000, 100000]);
    assert_eq!(ns, expected_ns);

    let six = &rows[5];
    assert!(close_to_printed(&six["lba_tauP"], "0.22800"));
    assert!(close_to_printed(&six["lba_tauQ"], "0.06989"));
    assert!(close_to_printed(&six["lba_num_tauQ"], "0.06989"));
    assert!(close_to_printed(&six["qome_tauP"], "0.22800"));
    assert!(close_to_printed(&six["qome_tauQ"], "0.45600"));
    assert_eq!(six["qome_cpu_s"], "");
    assert_eq!(six["warnings"], "");

    let seven = &rows[6];
    assert_eq!(seven["qome_tauP"], "");
    assert!(!seven["lba_num_tauP"].is_empty());
    let large = &rows[16];
    assert!(close_to_printed(&large["lba_tauQ"], "0.000004458"));
    assert_eq!(large["lba_num_tauP"], "");
}

#[test]
fn table1_flags_a_coarse_energy_tolerance() {
    let out = run(&[
        "table1",
        "--max-qome-n",
        "2",
        "--no-timing",
        "--energy-tol",
        "0.8",
    ]);
    let rows = rows(&stdout_ok(&out));
    assert_eq!(rows[0]["warnings"], "");
    assert!(rows[1]["warnings"].contains("energy tolerance 0.8 merges"));

    let capped = run(&[
        "table1",
        "--max-qome-n",
        "3",
        "--no-timing",
        "--qome-cap",
        "16",
    ]);
    let rows = self::rows(&stdout_ok(&capped));
    assert!(rows[2]["warnings"].contains("exceeds cap"));
    assert!(!rows[1]["qome_tauP"].is_empty());
    assert_eq!(rows[2]["qome_tauP"], "");

    let bad = run(&["table1", "--energy-tol=-1"]);
    assert_eq!(bad.status.code(), Some(2));
}
