use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_medianwalk");

fn run(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("MEDIANWALK_OUT");
    if let Some(dir) = env_out {
        cmd.env("MEDIANWALK_OUT", dir);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

fn registry(dir: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(dir.join("registry.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

const SMALL_CLT: &str = r#"{"n": 400, "trials": 120, "psi": null}"#;

#[test]
fn complex_gen_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "gen.json", r#"{"complex": {"family": "grid", "p": 4, "q": 3}}"#);
    let o = run(&["complex", "gen", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let generated = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".complex.json"))
        .expect("complex file written");

    let vcfg = write_config(
        dir.path(),
        "verify.json",
        &format!(r#"{{"complex_file": {:?}, "triples": 100, "lemma_samples": 100}}"#, generated.to_str().unwrap()),
    );
    let o = run(&["complex", "verify", "--config", &vcfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    assert_eq!(registry(&out).len(), 2);
}

#[test]
fn clt_run_passes_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "clt.json", SMALL_CLT);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["clt", "run", "--config", &cfg, "--seed", "5", "--trials", "150", "--out", out.to_str().unwrap()], None);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
    let names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    let mut compared = 0;
    for name in names {
        if name == "registry.jsonl" {
            continue;
        }
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
        compared += 1;
    }
    assert_eq!(compared, 2);
    let manifest = &registry(&a)[0];
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["command"], "clt run");
}

#[test]
fn env_var_overrides_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "clt.json", SMALL_CLT);
    let (flag, env) = (dir.path().join("flag"), dir.path().join("env"));
    let o = run(&["clt", "run", "--config", &cfg, "--out", flag.to_str().unwrap()], Some(&env));
    assert_eq!(code(&o), 0);
    assert!(env.join("registry.jsonl").exists());
    assert!(!flag.exists());
}

#[test]
fn failed_check_exits_one_with_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    // a wrong variance oracle must be reported as a violation
    let cfg = write_config(dir.path(), "bad.json", r#"{"n": 400, "trials": 600, "psi": null, "sigma2_oracle": 5.0}"#);
    let out = dir.path().join("out");
    let o = run(&["clt", "run", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert!(fs::read_dir(&out).unwrap().count() >= 3);
    assert_eq!(registry(&out)[0]["outcome"], "violation");
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let outs = out.to_str().unwrap();
    let unknown = write_config(dir.path(), "unknown.json", r#"{"momment": 2}"#);
    let o = run(&["clt", "run", "--config", &unknown, "--out", outs], None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("momment"));

    let broken = write_config(dir.path(), "broken.json", "{ not json");
    assert_eq!(code(&run(&["raag", "check", "--config", &broken, "--out", outs], None)), 2);

    let missing = dir.path().join("nope.json");
    assert_eq!(code(&run(&["walk", "run", "--config", missing.to_str().unwrap(), "--out", outs], None)), 2);

    let bad_complex = write_config(dir.path(), "c.json", r#"{"vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]}"#);
    let cfg = write_config(dir.path(), "v.json", &format!(r#"{{"complex_file": {bad_complex:?}}}"#));
    assert_eq!(code(&run(&["complex", "verify", "--config", &cfg, "--out", outs], None)), 2);

    assert_eq!(code(&run(&["clt", "run", "--bogus-flag"], None)), 2);
    assert_eq!(code(&run(&["suite", "nonsense", "--out", outs], None)), 2);
    assert!(registry(&out).iter().all(|m| m["exit_code"] == 2));
}

#[test]
fn panics_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "panic.json",
        r#"{"complex": {"family": "median_closure", "seed": 1, "dim": 64, "points": 4}}"#,
    );
    let o = run(&["complex", "verify", "--config", &cfg, "--out", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 3);
    assert_eq!(registry(&out).last().unwrap()["outcome"], "panic");
}

#[test]
fn report_show_sorts_keys() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    fs::write(&p, r#"{"b": 1, "a": {"d": 2.5, "c": [1, 2]}}"#).unwrap();
    let o = run(&["report", "show", p.to_str().unwrap()], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let (a, b) = (text.find("\"a\"").unwrap(), text.find("\"b\"").unwrap());
    assert!(a < b && text.find("\"c\"").unwrap() < text.find("\"d\"").unwrap());
    assert_eq!(code(&run(&["report", "show", dir.path().join("missing.json").to_str().unwrap()], None)), 2);
}
