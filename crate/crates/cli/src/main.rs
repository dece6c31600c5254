use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use medianwalk::harness::{
    self, canonical_json, invoke, load_config, record_failure, resolve_out_dir, suites, ExperimentConfig, HarnessError,
    Suite, EXIT_CONFIG, EXIT_PANIC,
};

#[derive(Parser)]
#[command(name = "medianwalk", version, about = "Median-graph lemma checks and RAAG random-walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (MEDIANWALK_OUT takes precedence).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Strong-separation certification radius.
    #[arg(long, global = true)]
    radius: Option<usize>,
    #[arg(long, global = true)]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or verify finite median complexes.
    Complex {
        #[command(subcommand)]
        action: ComplexAction,
        #[command(flatten)]
        common: Common,
    },
    /// RAAG consistency against materialized hulls.
    Raag {
        #[command(subcommand)]
        action: RaagAction,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate walks and measure S(n) growth, deviations and the box lemma.
    Walk {
        #[command(subcommand)]
        action: RunAction,
        #[command(flatten)]
        common: Common,
    },
    /// Drift, variance and normality of the CLT statistic.
    Clt {
        #[command(subcommand)]
        action: RunAction,
        #[command(flatten)]
        common: Common,
    },
    /// Inspect written reports.
    Report {
        #[command(subcommand)]
        action: ReportAction,
    },
    /// Run a named suite: lemmas, raag-consistency, clt, s-growth or full.
    Suite {
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum ComplexAction {
    Gen,
    Verify,
}

#[derive(Subcommand)]
enum RaagAction {
    Check,
}

#[derive(Subcommand)]
enum RunAction {
    Run,
}

#[derive(Subcommand)]
enum ReportAction {
    /// Print a report with sorted keys.
    Show { path: PathBuf },
}

fn load(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(r) = common.radius {
        cfg.radius = r;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(name: &str, common: &Common, suite: Option<Suite>, gen: bool) -> i32 {
    let cfg = match load(common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            let out = resolve_out_dir(common.out.as_deref(), &ExperimentConfig::default());
            let _ = record_failure(name, &out, common.seed.unwrap_or(0), e.exit_code());
            return e.exit_code();
        }
    };
    let out = resolve_out_dir(common.out.as_deref(), &cfg);
    let inv = invoke(name, &cfg, &out, |cfg| match suite {
        Some(s) => harness::run_suite(s, cfg),
        None if gen => Ok(vec![suites::complex_gen_suite(cfg)?]),
        None => unreachable!("every command names a suite or generation"),
    });
    if let Some(e) = &inv.error {
        eprintln!("error: {e}");
    }
    for r in &inv.results {
        println!("{}: {}", r.suite, if r.passed { "PASS" } else { "FAIL" });
        if let Some(checks) = r.report["checks"].as_array() {
            for c in checks {
                let mark = if c["passed"].as_bool() == Some(true) { "ok  " } else { "FAIL" };
                println!("  {mark} {}", c["name"].as_str().unwrap_or("?"));
            }
        }
    }
    for a in &inv.artifacts {
        println!("wrote {}", a.display());
    }
    inv.exit_code
}

fn show(path: &Path) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    match serde_json::from_str::<serde_json::Value>(&text) {
        Ok(v) => {
            print!("{}", canonical_json(&v));
            0
        }
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            EXIT_CONFIG
        }
    }
}

fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::Complex { action, common } => match action {
            ComplexAction::Gen => execute("complex gen", &common, None, true),
            ComplexAction::Verify => execute("complex verify", &common, Some(Suite::Lemmas), false),
        },
        Command::Raag { action: RaagAction::Check, common } => {
            execute("raag check", &common, Some(Suite::RaagConsistency), false)
        }
        Command::Walk { action: RunAction::Run, common } => execute("walk run", &common, Some(Suite::SGrowth), false),
        Command::Clt { action: RunAction::Run, common } => execute("clt run", &common, Some(Suite::Clt), false),
        Command::Report { action: ReportAction::Show { path } } => show(&path),
        Command::Suite { name, common } => match Suite::parse(&name) {
            Some(s) => execute(&format!("suite {name}"), &common, Some(s), false),
            None => {
                eprintln!("error: unknown suite {name:?}");
                EXIT_CONFIG
            }
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let out = match &cli.command {
        Command::Complex { common, .. }
        | Command::Raag { common, .. }
        | Command::Walk { common, .. }
        | Command::Clt { common, .. }
        | Command::Suite { common, .. } => common.out.clone(),
        Command::Report { .. } => None,
    };
    let code = panic::catch_unwind(AssertUnwindSafe(|| dispatch(cli))).unwrap_or_else(|_| {
        let out = resolve_out_dir(out.as_deref(), &ExperimentConfig::default());
        let _ = record_failure("panic", &out, 0, EXIT_PANIC);
        EXIT_PANIC
    });
    ExitCode::from(code as u8)
}
