use sparsetomo_cli::{run, run_audit, run_nmr, CliError, ExperimentConfig};
use std::path::{Path, PathBuf};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sparsetomo-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn load(name: &str) -> ExperimentConfig {
    ExperimentConfig::from_path(&configs_dir().join(name)).unwrap()
}

#[test]
fn malformed_config_is_rejected_with_position() {
    let err = ExperimentConfig::from_json("{ \"experiment\": \"nmr\", }").unwrap_err();
    match err {
        CliError::Validation(msg) => {
            assert!(msg.contains("line"), "diagnostic should carry a position: {msg}");
        }
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let text = r#"{ "experiment": "audit", "seed": 1, "surprise": true }"#;
    let err = ExperimentConfig::from_json(text).unwrap_err();
    match err {
        CliError::Validation(msg) => assert!(msg.contains("surprise"), "{msg}"),
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn deterministic_reports_for_identical_config_and_seed() {
    let mut config = load("fermion_reference.json");
    // shrink for speed; determinism is what is under test
    config.recovery.as_mut().unwrap().sample_points = Some(60);
    config.grid.as_mut().unwrap().points = 11;
    let d1 = temp_dir("det1");
    let d2 = temp_dir("det2");
    run(&config, &d1).unwrap();
    run(&config, &d2).unwrap();
    for file in ["summary.json", "trajectories.csv", "coefficients.bin"] {
        let a = std::fs::read(d1.join(file)).unwrap();
        let b = std::fs::read(d2.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn nmr_reference_run_meets_epsilon() {
    let config = load("nmr_reference.json");
    let dir = temp_dir("nmr");
    let out = run_nmr(&config, &dir).unwrap();
    assert!(out.guarantee_met, "reference run must stay within epsilon");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["within_epsilon"], serde_json::Value::Bool(true));
    assert_eq!(summary["plan"]["sample_points"], 64);
    // artifacts exist
    assert!(dir.join("trajectories.csv").exists());
    assert!(dir.join("coefficients.bin").exists());
}

#[test]
fn nmr_exact_oracle_trajectories_are_machine_precision() {
    let mut config = load("nmr_reference.json");
    config.tomography.as_mut().unwrap().procedure = sparsetomo_cli::ProcedureConfig::Exact;
    config.tomography.as_mut().unwrap().epsilon = 1e-8;
    // full support: no truncation tail competes with the oracle's precision
    config.recovery.as_mut().unwrap().gamma = None;
    let dir = temp_dir("nmr-exact");
    let out = run_nmr(&config, &dir).unwrap();
    assert!(out.guarantee_met, "exact-oracle trajectories must be < 1e-8");
}

#[test]
fn fermion_reference_run() {
    let config = load("fermion_reference.json");
    let dir = temp_dir("fermion");
    let out = run(&config, &dir).unwrap();
    assert!(out.guarantee_met);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    let flip = summary["system"]["time_reversal_deviation"].as_f64().unwrap();
    assert!(flip < 1e-8, "conjugated Hamiltonian must equal −H, deviation {flip}");
    for err in summary["trajectory_errors"].as_array().unwrap() {
        let v = err["max_abs_error"].as_f64().unwrap();
        assert!(v < 1e-6, "{} error {v}", err["observable"]);
    }
}

#[test]
fn support_id_reference_finds_true_support() {
    let config = load("support_id_reference.json");
    let dir = temp_dir("sid");
    run(&config, &dir).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("support.json")).unwrap()).unwrap();
    let labels: Vec<i64> = summary["labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_i64().unwrap())
        .collect();
    assert_eq!(labels, vec![-3, 0, 3]);
}

#[test]
fn audit_negative_control() {
    let mut config = load("audit.json");
    let dir = temp_dir("audit-clean");
    let out = run_audit(&config, &dir).unwrap();
    assert!(out.guarantee_met, "clean audit must pass");
    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("audit.json")).unwrap()).unwrap();
    let checks = ledger["checks"].as_array().unwrap();
    assert!(checks.len() >= 25);
    assert!(checks.iter().any(|c| c["id"] == "projector_cross_term"));
    assert!(checks.iter().any(|c| c["id"] == "spillover_and_pinv_bounds"));
    assert!(checks.iter().any(|c| c["id"] == "phase_expansion_convergence"));

    config.inject_corruption = true;
    let dir2 = temp_dir("audit-corrupt");
    let out2 = run_audit(&config, &dir2).unwrap();
    assert!(!out2.guarantee_met, "injected corruption must fail the ledger");
    let ledger2: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir2.join("audit.json")).unwrap()).unwrap();
    let budget = ledger2["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == "budget_decomposition")
        .unwrap();
    assert_eq!(budget["passed"], serde_json::Value::Bool(false));
}

#[test]
fn predict_reads_sidecar_and_writes_csv() {
    // produce coefficients via a fast exact run, then predict from disk
    let mut config = load("fermion_reference.json");
    config.recovery.as_mut().unwrap().sample_points = Some(60);
    config.grid.as_mut().unwrap().points = 5;
    let dir = temp_dir("predict-src");
    run(&config, &dir).unwrap();

    let predict_config = ExperimentConfig::from_json(&format!(
        r#"{{
            "experiment": "predict",
            "observables": ["ZI", "IZ"],
            "grid": {{ "points": 17 }},
            "seed": 1,
            "coefficients": "{}"
        }}"#,
        dir.join("coefficients.bin").display()
    ))
    .unwrap();
    let dir2 = temp_dir("predict-out");
    let out = run(&predict_config, &dir2).unwrap();
    let csv = std::fs::read_to_string(out.summary_path).unwrap();
    assert!(csv.starts_with("x,observable,estimate,stderr,exact,abs_error\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 17);
}

#[test]
fn binary_smoke_test() {
    let exe = env!("CARGO_BIN_EXE_sparsetomo");
    // bad arguments → validation exit code
    let status = std::process::Command::new(exe).arg("nonsense").status().unwrap();
    assert_eq!(status.code(), Some(1));
    // missing config flag
    let status = std::process::Command::new(exe).arg("run-nmr").status().unwrap();
    assert_eq!(status.code(), Some(1));
    // a real run through the binary
    let dir = temp_dir("bin");
    let status = std::process::Command::new(exe)
        .args([
            "support-id",
            "--config",
            configs_dir().join("support_id_reference.json").to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(dir.join("support.json").exists());
    // subcommand/config mismatch
    let status = std::process::Command::new(exe)
        .args([
            "run-fermion",
            "--config",
            configs_dir().join("support_id_reference.json").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
