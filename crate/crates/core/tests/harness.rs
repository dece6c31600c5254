use std::fs;
use std::path::Path;

use medianwalk::harness::{self, invoke, run_suite, ExperimentConfig, Suite, CSV_HEADER, EXIT_CONFIG, EXIT_PASS, EXIT_VIOLATION};

fn small() -> ExperimentConfig {
    ExperimentConfig::from_json(
        r#"{"seed": 11, "n": 400, "trials": 120, "psi": null, "family_count": 6, "max_vertices": 64,
            "box_quadruples": 2000, "triples": 50, "lemma_samples": 50,
            "raag_instances": 40, "certified_pairs": 200, "identity_samples": 200}"#,
    )
    .unwrap()
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != harness::REGISTRY_FILE)
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = small();
    for suite in [Suite::Lemmas, Suite::RaagConsistency, Suite::Clt, Suite::SGrowth] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = invoke(suite.name(), &cfg, a.path(), |c| run_suite(suite, c));
        let rb = invoke(suite.name(), &cfg, b.path(), |c| run_suite(suite, c));
        assert_eq!(ra.exit_code, rb.exit_code, "{}", suite.name());
        let (fa, fb) = (read_all(a.path()), read_all(b.path()));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{} differs between reruns", suite.name());
    }
}

#[test]
fn artifacts_are_named_by_config_hash() {
    let cfg = small();
    let dir = tempfile::tempdir().unwrap();
    let inv = invoke("clt", &cfg, dir.path(), |c| run_suite(Suite::Clt, c));
    assert_eq!(inv.exit_code, EXIT_PASS, "{:?}", inv.results.first().map(|r| &r.report));
    let stem = format!("clt-{}", &cfg.hash()[..12]);
    assert!(dir.path().join(format!("{stem}.json")).exists());
    let csv = fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    // one row per trial and checkpoint (n/4, n/2, n)
    assert_eq!(csv.lines().count(), 3 * cfg.trials + 1);

    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join(format!("{stem}.json"))).unwrap()).unwrap();
    assert_eq!(report["config_hash"], serde_json::json!(cfg.hash()));
    assert_eq!(report["passed"], serde_json::json!(true));
}

#[test]
fn registry_gets_one_line_per_invocation() {
    let cfg = small();
    let dir = tempfile::tempdir().unwrap();
    for _ in 0..3 {
        invoke("raag check", &cfg, dir.path(), |c| run_suite(Suite::RaagConsistency, c));
    }
    let reg = fs::read_to_string(dir.path().join(harness::REGISTRY_FILE)).unwrap();
    let lines: Vec<serde_json::Value> = reg.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    for l in &lines {
        assert_eq!(l["command"], "raag check");
        assert_eq!(l["config_hash"], serde_json::json!(cfg.hash()));
        assert_eq!(l["seed"], 11);
        assert_eq!(l["exit_code"], 0);
    }
}

#[test]
fn violations_and_config_errors_map_to_exit_codes() {
    let cfg = small();
    let dir = tempfile::tempdir().unwrap();
    let inv = invoke("clt", &cfg, dir.path(), |c| {
        let mut r = run_suite(Suite::Clt, c)?;
        r[0].passed = false;
        Ok(r)
    });
    assert_eq!(inv.exit_code, EXIT_VIOLATION);
    assert!(!inv.artifacts.is_empty());

    let mut bad = cfg.clone();
    bad.graph = "no-such-graph".into();
    let inv = invoke("clt", &bad, dir.path(), |c| run_suite(Suite::Clt, c));
    assert_eq!(inv.exit_code, EXIT_CONFIG);
    assert!(inv.error.is_some());
}

#[test]
fn config_hash_ignores_key_order_and_tracks_values() {
    let a = ExperimentConfig::from_json(r#"{"seed": 3, "n": 100}"#).unwrap();
    let b = ExperimentConfig::from_json(r#"{"n": 100, "seed": 3}"#).unwrap();
    let c = ExperimentConfig::from_json(r#"{"n": 100, "seed": 4}"#).unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn unknown_keys_and_bad_values_are_rejected() {
    let err = ExperimentConfig::from_json(r#"{"momment": 1}"#).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    assert!(err.to_string().contains("momment"));
    assert!(ExperimentConfig::from_json(r#"{"n": "ten"}"#).is_err());
    let err = ExperimentConfig::from_json(r#"{"measure": {"kind": "explicit", "support": [["a", 0.5]]}}"#)
        .and_then(|c| {
            c.validate()?;
            c.step_measure(&c.defining_graph()?)
        })
        .unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
}
