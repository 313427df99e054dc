//! Scenario-file loading against the bundled documents.

use junctionq_core::config::{builtin, load_config, ScenarioConfig};

fn configs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn bundled_case_study_loads_and_matches_builtin() {
    let cfg = load_config(configs_dir().join("case_study.json")).unwrap();
    assert_eq!(cfg, builtin::case_study());
    assert_eq!(cfg.junction.routes.len(), 4);
    assert_eq!(cfg.junction.train_types.len(), 4);
    match &cfg.junction.service {
        junctionq_core::config::ServiceConfig::Headways { entries } => {
            assert_eq!(entries.len(), 40)
        }
        _ => panic!("expected headway table"),
    }
}

#[test]
fn bundled_validation_loads_and_matches_builtin() {
    let cfg = load_config(configs_dir().join("validation.json")).unwrap();
    assert_eq!(cfg, builtin::validation());
}

#[test]
fn emitted_canonical_config_reloads_identically() {
    let cfg = builtin::case_study();
    let dir = std::env::temp_dir().join("junctionq_cfg_roundtrip");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("case.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let reloaded = load_config(&path).unwrap();
    assert_eq!(cfg, reloaded);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn state_cap_env_override_applies() {
    let dir = std::env::temp_dir().join("junctionq_cfg_envcap");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("validation.json");
    std::fs::write(&path, serde_json::to_string_pretty(&builtin::validation()).unwrap()).unwrap();
    // NB: process-global environment; restore afterwards
    std::env::set_var(junctionq_core::config::STATE_CAP_ENV, "12345");
    let cfg = load_config(&path).unwrap();
    std::env::remove_var(junctionq_core::config::STATE_CAP_ENV);
    assert_eq!(cfg.model.state_cap, 12345);
    let cfg2: ScenarioConfig = load_config(&path).unwrap();
    assert_eq!(cfg2.model.state_cap, junctionq_core::ctmc::DEFAULT_STATE_CAP);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_file_is_a_config_error() {
    let err = load_config("/nonexistent/junctionq.json").unwrap_err();
    assert!(matches!(err, junctionq_core::error::Error::Config(_)));
}
