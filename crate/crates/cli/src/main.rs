//! `trapwave`: batch front-end for the trapped-NLS laboratory.
//!
//! Exit codes: 0 success, 1 numerical-tolerance failure, 2 invalid
//! configuration.

mod commands;
mod config;
mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::{Command, RunConfig};
use report::{exit_code, Entry, Envelope, Failure, EXIT_CONFIG};

#[derive(Debug, Parser)]
#[command(name = "trapwave", version, about = "Exact and reference propagation of trapped Hartree-type NLS equations")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Primary output file (CSV or JSON); CSV commands also write a `.json` summary next to it.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Add the split-step oracle comparison column (propagate).
    #[arg(long, global = true)]
    compare_oracle: bool,
    /// Overrides the config's seed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Size of the worker pool.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Sub {
    /// CSV time series of mass, energy, X, P, gauge phase and Σ¹ norm.
    Propagate,
    /// JSON report on a closed-form standing wave.
    StandingWave,
    /// CSV of modulated distances plus a JSON summary.
    Stability,
    /// JSON report on Hessian inertia and the sign of d''.
    Morse,
    /// JSON report on the truncated-basis projection of the initial state.
    BasisCheck,
}

impl Sub {
    fn command(self) -> Command {
        match self {
            Sub::Propagate => Command::Propagate,
            Sub::StandingWave => Command::StandingWave,
            Sub::Stability => Command::Stability,
            Sub::Morse => Command::Morse,
            Sub::BasisCheck => Command::BasisCheck,
        }
    }

    fn writes_csv(self) -> bool {
        matches!(self, Sub::Propagate | Sub::Stability)
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::config(vec![Entry::error("config_missing", "--config PATH is required")]))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::io("config_unreadable", format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| Failure::config(vec![e]))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, Failure> {
    let cmd = cli.command.command();
    let issues = cfg.validate(cmd);
    if !issues.is_empty() {
        return Err(Failure::config(issues));
    }
    let mut cfg = cfg.clone();
    if let Some(dir) = cli.config.as_deref().and_then(Path::parent) {
        cfg.resolve_paths(dir);
    }
    let run = || match cli.command {
        Sub::Propagate => commands::propagate::run(&cfg, cli.compare_oracle),
        Sub::StandingWave => commands::standing::run(&cfg),
        Sub::Stability => commands::stability::run(&cfg),
        Sub::Morse => commands::morse::run(&cfg),
        Sub::BasisCheck => commands::basis_check::run(&cfg),
    };
    match cli.workers {
        Some(0) => Err(Failure::config(vec![Entry::error("workers_invalid", "--workers must be at least 1")])),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::io("workers_invalid", e))?
            .install(run),
        None => run(),
    }
}

/// Where the JSON envelope goes: the `--out` file for JSON commands, a
/// sibling `.json` file for CSV commands, else stdout or stderr.
fn envelope_path(cli: &Cli) -> Option<PathBuf> {
    let out = cli.out.as_ref()?;
    if !cli.command.writes_csv() {
        return Some(out.clone());
    }
    let side = out.with_extension("json");
    Some(if &side == out {
        PathBuf::from(format!("{}.summary.json", out.display()))
    } else {
        side
    })
}

fn write_to(path: Option<&Path>, stderr: bool, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| Failure::io("output_unwritable", format!("{}: {e}", p.display()))),
        None if stderr => std::io::stderr().write_all(bytes).map_err(|e| Failure::io("output_unwritable", e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure::io("output_unwritable", e)),
    }
}

fn emit(cli: &Cli, echo: serde_json::Value, result: Result<Outcome, Failure>) -> Result<u8, Failure> {
    let (envelope, code) = match result {
        Ok(outcome) => {
            if let Some(table) = &outcome.table {
                let mut buf = Vec::new();
                table.write(&mut buf).map_err(|e| Failure::io("output_unwritable", e))?;
                write_to(cli.out.as_deref(), false, &buf)?;
            }
            let code = exit_code(&outcome.diagnostics);
            (Envelope::new(echo, outcome.results, outcome.diagnostics), code)
        }
        Err(f) => (Envelope::new(echo, serde_json::Value::Null, f.diagnostics), f.code),
    };
    let target = envelope_path(cli);
    let to_stderr = target.is_none() && cli.command.writes_csv();
    write_to(target.as_deref(), to_stderr, envelope.to_json().as_bytes())?;
    if !to_stderr {
        for d in envelope.diagnostics.iter().filter(|d| d.flagged) {
            eprintln!("trapwave: {}", describe(d));
        }
    }
    Ok(code)
}

fn describe(d: &Entry) -> String {
    match (&d.message, d.value, d.threshold) {
        (Some(m), _, _) => format!("{}: {m}", d.name),
        (None, Some(v), Some(t)) => format!("{}: {v:.3e} exceeds {t:.3e}", d.name),
        _ => d.name.clone(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let loaded = load(&cli);
    let echo = match &loaded {
        Ok(cfg) => serde_json::to_value(cfg).expect("config serializes"),
        Err(_) => serde_json::Value::Null,
    };
    let result = loaded.and_then(|cfg| execute(&cli, &cfg));
    match emit(&cli, echo, result) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            for d in &f.diagnostics {
                eprintln!("trapwave: {}", describe(d));
            }
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
