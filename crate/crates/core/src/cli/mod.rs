//! Command-line experiment runner.
//!
//! Each subcommand reads one TOML config, runs its checks and writes a JSON
//! report `{"header": ..., "body": ...}`. Only the header carries the
//! timestamp, so identical configs give byte-identical bodies.
//!
//! Exit codes: 0 all checks pass, 1 some check fails, 2 usage or config
//! error, 3 abstention (a search budget ran out or a verdict could not be
//! certified).

mod commands;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

pub use config::{ExperimentConfig, FieldError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ABSTAIN: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "kacbench",
    version,
    about = "Kac-lemma workbench: allocations, cells and return-time identities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    /// Integral of the return time over the target.
    VerifyKac,
    /// Transport identity for an allocation.
    VerifyAllocation,
    /// Kac function, tiling and tail bound.
    KacFunction,
    /// Voronoi cells of a hitting set on Z^d.
    VoronoiCells,
    /// Relation Kac identities for a map within classes.
    RelationCheck,
    /// Sweep-out partition, fingerprints and reconstruction.
    GeneratorDemo,
    /// Orbit census.
    Census,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::VerifyKac => "verify-kac",
            CommandKind::VerifyAllocation => "verify-allocation",
            CommandKind::KacFunction => "kac-function",
            CommandKind::VoronoiCells => "voronoi-cells",
            CommandKind::RelationCheck => "relation-check",
            CommandKind::GeneratorDemo => "generator-demo",
            CommandKind::Census => "census",
        }
    }

    pub const ALL: [CommandKind; 7] = [
        CommandKind::VerifyKac,
        CommandKind::VerifyAllocation,
        CommandKind::KacFunction,
        CommandKind::VoronoiCells,
        CommandKind::RelationCheck,
        CommandKind::GeneratorDemo,
        CommandKind::Census,
    ];

    pub fn from_name(name: &str) -> Option<CommandKind> {
        CommandKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(clap::Args, Debug, Clone)]
pub struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for report files; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides every seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub budget: Option<u64>,
    /// Suppresses the summary line.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integral of the return time over the target.
    VerifyKac(RunArgs),
    /// Transport identity for an allocation.
    VerifyAllocation(RunArgs),
    /// Kac function, tiling and tail bound.
    KacFunction(RunArgs),
    /// Voronoi cells of a hitting set on Z^d.
    VoronoiCells(RunArgs),
    /// Relation Kac identities for a map within classes.
    RelationCheck(RunArgs),
    /// Sweep-out partition, fingerprints and reconstruction.
    GeneratorDemo(RunArgs),
    /// Orbit census.
    Census(RunArgs),
}

impl Command {
    fn split(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::VerifyKac(a) => (CommandKind::VerifyKac, a),
            Command::VerifyAllocation(a) => (CommandKind::VerifyAllocation, a),
            Command::KacFunction(a) => (CommandKind::KacFunction, a),
            Command::VoronoiCells(a) => (CommandKind::VoronoiCells, a),
            Command::RelationCheck(a) => (CommandKind::RelationCheck, a),
            Command::GeneratorDemo(a) => (CommandKind::GeneratorDemo, a),
            Command::Census(a) => (CommandKind::Census, a),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Abstain,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool) -> Self {
        Check {
            name: name.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            detail: None,
        }
    }

    pub fn skipped(name: impl Into<String>, why: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::Skipped,
            detail: Some(why.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Run parameters after defaults and overrides, echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub samples: u64,
    pub budget: u64,
    pub epsilon: String,
    pub n_max: usize,
    pub radius: i64,
    pub tail_n_max: Option<usize>,
    pub universal_shapes: bool,
}

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_RADIUS: i64 = 10;
pub const DEFAULT_N_MAX: usize = 20;
pub const DEFAULT_EPSILON: &str = "1/2";

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub exact: Option<Value>,
    pub estimated: Option<Value>,
    pub checks: Vec<Check>,
    /// Extra report files, by name.
    pub artifacts: Vec<(String, String)>,
}

#[derive(Debug)]
pub enum CommandError {
    Config(FieldError),
    Abstain(String),
}

impl From<FieldError> for CommandError {
    fn from(e: FieldError) -> Self {
        CommandError::Config(e)
    }
}

#[derive(Serialize)]
struct Header {
    tool: &'static str,
    version: &'static str,
    timestamp_unix: u64,
    config_path: String,
}

#[derive(Serialize)]
struct Verdict {
    status: Status,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct Body<'a> {
    command: &'static str,
    inputs: &'a ExperimentConfig,
    settings: &'a Settings,
    exact: Option<Value>,
    estimated: Option<Value>,
    verdict: Verdict,
}

#[derive(Serialize)]
struct Report<'a> {
    header: Header,
    body: &'a Value,
}

fn overall(checks: &[Check]) -> Status {
    if checks.iter().any(|c| c.status == Status::Fail) {
        Status::Fail
    } else if checks.iter().any(|c| c.status == Status::Abstain) {
        Status::Abstain
    } else {
        Status::Pass
    }
}

fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass | Status::Skipped => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Abstain => EXIT_ABSTAIN,
    }
}

/// Command-line values that take precedence over the config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub budget: Option<u64>,
}

fn resolve_settings(cfg: &ExperimentConfig, over: &Overrides) -> Settings {
    let run = &cfg.run;
    let seed = over
        .seed
        .or(run.seed)
        .or_else(|| cfg.system.as_ref().and_then(|s| s.config_seed()))
        .unwrap_or(0);
    Settings {
        seed,
        samples: over.samples.or(run.samples).unwrap_or(DEFAULT_SAMPLES),
        budget: over
            .budget
            .or(run.budget)
            .unwrap_or(crate::allocation::DEFAULT_BUDGET),
        epsilon: match &run.epsilon {
            Some(config::Number::Int(n)) => n.to_string(),
            Some(config::Number::Text(s)) => s.clone(),
            None => DEFAULT_EPSILON.to_string(),
        },
        n_max: run.n_max.unwrap_or(DEFAULT_N_MAX),
        radius: run.radius.unwrap_or(DEFAULT_RADIUS),
        tail_n_max: run.tail_n_max,
        universal_shapes: run.universal_shapes.unwrap_or(false),
    }
}

/// A finished command: the deterministic report body and extra files.
#[derive(Debug)]
pub struct Evaluation {
    pub status: Status,
    pub body: Value,
    pub artifacts: Vec<(String, String)>,
}

impl Evaluation {
    pub fn exit_code(&self) -> i32 {
        exit_code(self.status)
    }

    /// Names of failed or abstaining checks.
    pub fn unresolved(&self) -> Vec<String> {
        self.body["verdict"]["checks"]
            .as_array()
            .into_iter()
            .flatten()
            .filter(|c| c["status"] == "fail" || c["status"] == "abstain")
            .filter_map(|c| c["name"].as_str().map(str::to_string))
            .collect()
    }
}

/// Runs `kind` on a parsed config. Config errors name the offending field.
pub fn evaluate(
    kind: CommandKind,
    cfg: &ExperimentConfig,
    over: &Overrides,
) -> Result<Evaluation, FieldError> {
    if let Some(c) = &cfg.command {
        if c != kind.name() {
            return Err(config::field_err(
                "command",
                format!("config is for `{c}`, not `{}`", kind.name()),
            ));
        }
    }
    let settings = resolve_settings(cfg, over);
    let outcome = match commands::dispatch(kind, cfg, &settings) {
        Ok(o) => o,
        Err(CommandError::Config(e)) => return Err(e),
        Err(CommandError::Abstain(why)) => Outcome {
            checks: vec![Check {
                name: kind.name().to_string(),
                status: Status::Abstain,
                detail: Some(why),
            }],
            ..Outcome::default()
        },
    };
    let status = overall(&outcome.checks);
    let body = Body {
        command: kind.name(),
        inputs: cfg,
        settings: &settings,
        exact: outcome.exact,
        estimated: outcome.estimated,
        verdict: Verdict {
            status,
            checks: outcome.checks,
        },
    };
    Ok(Evaluation {
        status,
        body: serde_json::to_value(&body).expect("reports serialize"),
        artifacts: outcome.artifacts,
    })
}

fn load_config(path: &Path) -> Result<ExperimentConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_outputs(
    out: Option<&Path>,
    report: &str,
    artifacts: &[(String, String)],
) -> std::io::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("report.json"), report)?;
            for (name, contents) in artifacts {
                fs::write(dir.join(name), contents)?;
            }
        }
        None => println!("{report}"),
    }
    Ok(())
}

/// Runs one parsed invocation and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let (kind, args) = cli.command.split();
    let cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let over = Overrides {
        seed: args.seed,
        samples: args.samples,
        budget: args.budget,
    };
    let eval = match evaluate(kind, &cfg, &over) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return EXIT_USAGE;
        }
    };
    let report = Report {
        header: Header {
            tool: "kacbench",
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config_path: args.config.display().to_string(),
        },
        body: &eval.body,
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    if let Err(e) = write_outputs(args.out.as_deref(), &text, &eval.artifacts) {
        eprintln!("error: writing reports: {e}");
        return EXIT_USAGE;
    }
    if !args.quiet {
        let label = match eval.status {
            Status::Pass | Status::Skipped => "PASS",
            Status::Fail => "FAIL",
            Status::Abstain => "ABSTAIN",
        };
        let unresolved = eval.unresolved();
        if unresolved.is_empty() {
            eprintln!("{} {label}", kind.name());
        } else {
            eprintln!("{} {label}: {}", kind.name(), unresolved.join(", "));
        }
    }
    eval.exit_code()
}

/// Parses arguments and runs; usage errors exit with code 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            code
        }
    }
}
