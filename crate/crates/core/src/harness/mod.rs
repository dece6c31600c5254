//! Configuration, orchestration and persistence for the verification suites.

pub mod config;
pub mod emit;
pub mod suites;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{load_config, BoiteConfig, DeviationConfig, ExperimentConfig, PsiConfig, Tolerances};
pub use emit::{canonical_json, emit_csv, emit_json, format_float, walk_csv, CSV_HEADER};
pub use suites::{standard_families, Check, SuiteResult};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PANIC: i32 = 3;

pub const OUT_ENV: &str = "MEDIANWALK_OUT";
pub const DEFAULT_OUT: &str = "medianwalk-out";
pub const REGISTRY_FILE: &str = "registry.jsonl";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("cannot parse configuration: {0}")]
    ParseError(String),
    #[error("schema violation at `{key}`: {message}")]
    SchemaViolation { key: String, message: String },
    #[error("file not found: {}", .0.display())]
    FileMissing(PathBuf),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("integrity failure: {0}")]
    Integrity(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemmas,
    RaagConsistency,
    Clt,
    SGrowth,
    Full,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemmas => "lemmas",
            Suite::RaagConsistency => "raag-consistency",
            Suite::Clt => "clt",
            Suite::SGrowth => "s-growth",
            Suite::Full => "full",
        }
    }

    pub fn parse(name: &str) -> Option<Suite> {
        [Suite::Lemmas, Suite::RaagConsistency, Suite::Clt, Suite::SGrowth, Suite::Full]
            .into_iter()
            .find(|s| s.name() == name)
    }
}

/// One registry line per invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub build: String,
    pub prng: String,
    pub started: String,
    pub finished: String,
    pub outcome: String,
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
}

pub fn build_id() -> String {
    format!(
        "medianwalk {} ({})",
        env!("CARGO_PKG_VERSION"),
        if cfg!(debug_assertions) { "debug" } else { "release" }
    )
}

/// Output directory: `MEDIANWALK_OUT`, then the explicit flag, then the
/// config, then `medianwalk-out`.
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(env) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

pub fn append_manifest(out: &Path, manifest: &RunManifest) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out).map_err(|e| HarnessError::Io(format!("{}: {e}", out.display())))?;
    let path = out.join(REGISTRY_FILE);
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    writeln!(f, "{}", emit::compact_json(manifest)).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Runs the named suite; `full` runs the other four in order.
pub fn run_suite(suite: Suite, cfg: &ExperimentConfig) -> Result<Vec<SuiteResult>, HarnessError> {
    Ok(match suite {
        Suite::Lemmas => vec![suites::lemmas_suite(cfg)?],
        Suite::RaagConsistency => vec![suites::raag_suite(cfg)?],
        Suite::Clt => vec![suites::clt_suite(cfg)?],
        Suite::SGrowth => vec![suites::s_growth_suite(cfg)?],
        Suite::Full => {
            let mut all = Vec::new();
            for s in [Suite::Lemmas, Suite::RaagConsistency, Suite::Clt, Suite::SGrowth] {
                all.extend(run_suite(s, cfg)?);
            }
            all
        }
    })
}

/// Writes `<suite>-<hash prefix>.json` (and `.csv`) for each result.
pub fn write_results(out: &Path, cfg_hash: &str, results: &[SuiteResult]) -> Result<Vec<PathBuf>, HarnessError> {
    let mut paths = Vec::new();
    for r in results {
        let mut report = r.report.clone();
        report["config_hash"] = serde_json::json!(cfg_hash);
        let stem = format!("{}-{}", r.suite, &cfg_hash[..12]);
        let json_path = out.join(format!("{stem}.json"));
        emit_json(&report, &json_path)?;
        paths.push(json_path);
        if let Some(csv) = &r.csv {
            let csv_path = out.join(format!("{stem}.csv"));
            emit::write_file(&csv_path, csv)?;
            paths.push(csv_path);
        }
        for (suffix, contents) in &r.extra_files {
            let path = out.join(format!("{stem}.{suffix}"));
            emit::write_file(&path, contents)?;
            paths.push(path);
        }
    }
    Ok(paths)
}

/// Registry entry for an invocation that failed before a configuration
/// was available.
pub fn record_failure(command: &str, out: &Path, seed: u64, exit_code: i32) -> Result<(), HarnessError> {
    let now = Utc::now().to_rfc3339();
    append_manifest(
        out,
        &RunManifest {
            command: command.to_string(),
            config_hash: String::new(),
            seed,
            build: build_id(),
            prng: crate::walk::PRNG_NAME.to_string(),
            started: now.clone(),
            finished: now,
            outcome: if exit_code == EXIT_PANIC { "panic" } else { "config_error" }.to_string(),
            exit_code,
            artifacts: Vec::new(),
        },
    )
}

/// Everything one invocation produced.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    pub results: Vec<SuiteResult>,
    pub error: Option<HarnessError>,
}

/// Runs `body`, writes its artifacts and appends a manifest. Config errors
/// become exit code 2, failed checks exit code 1.
pub fn invoke(
    command: &str,
    cfg: &ExperimentConfig,
    out: &Path,
    body: impl FnOnce(&ExperimentConfig) -> Result<Vec<SuiteResult>, HarnessError>,
) -> Invocation {
    let started = Utc::now().to_rfc3339();
    let hash = cfg.hash();
    let outcome = body(cfg).and_then(|results| {
        let artifacts = write_results(out, &hash, &results)?;
        Ok((results, artifacts))
    });
    let (exit_code, artifacts, results, error) = match outcome {
        Ok((results, artifacts)) => {
            let code = if results.iter().all(|r| r.passed) { EXIT_PASS } else { EXIT_VIOLATION };
            (code, artifacts, results, None)
        }
        Err(e) => (e.exit_code(), Vec::new(), Vec::new(), Some(e)),
    };
    let manifest = RunManifest {
        command: command.to_string(),
        config_hash: hash,
        seed: cfg.seed,
        build: build_id(),
        prng: crate::walk::PRNG_NAME.to_string(),
        started,
        finished: Utc::now().to_rfc3339(),
        outcome: match exit_code {
            EXIT_PASS => "pass",
            EXIT_VIOLATION => "violation",
            _ => "config_error",
        }
        .to_string(),
        exit_code,
        artifacts: artifacts.clone(),
    };
    let error = match append_manifest(out, &manifest) {
        Err(e) if error.is_none() => Some(e),
        _ => error,
    };
    let exit_code = if exit_code == EXIT_PASS && error.is_some() { EXIT_CONFIG } else { exit_code };
    Invocation {
        exit_code,
        artifacts,
        results,
        error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Lemmas, Suite::RaagConsistency, Suite::Clt, Suite::SGrowth, Suite::Full] {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
        assert_eq!(Suite::parse("nope"), None);
    }
}
