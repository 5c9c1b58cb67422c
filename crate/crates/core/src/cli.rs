//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Error;
use crate::harness::{
    export_results, read_audit, read_curves, render_report, AuditRecord, AuditStatus, AUDIT_FILE, CURVES_FILE,
};
use crate::spaces::suite::GeometryReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_GEOMETRY: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;
pub const EXIT_NO_MODULUS: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "fejerlab", version, about = "Stochastic Fejer-monotone iterations on Hadamard spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Replaces `ensemble.seed`.
    #[arg(long)]
    pub seed_override: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the geometry suite for the configured space.
    Validate(Common),
    /// Run the ensemble and write the curves.
    Run(Common),
    /// Build the rate certificate and audit it against an ensemble.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Audit previously written curves instead of running afresh.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Summarise `audit.json` and `curves.csv` from the output directory.
    Report {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed_override: Option<u64>,
    },
}

struct Failure(i32, String);

impl Failure {
    fn input(e: Error) -> Self {
        Failure(EXIT_INPUT, e.to_string())
    }

    fn runtime(e: Error) -> Self {
        match e {
            Error::NoModulus(_) => Failure(EXIT_NO_MODULUS, e.to_string()),
            e => Failure(EXIT_RUNTIME, e.to_string()),
        }
    }
}

fn load(common: &Common) -> Result<Experiment, Failure> {
    let mut cfg = ExperimentConfig::load(&common.config).map_err(Failure::input)?;
    if let Some(s) = common.seed_override {
        cfg.ensemble.seed = s;
    }
    cfg.build().map_err(Failure::input)
}

#[derive(Serialize)]
struct ValidateSummary {
    passed: bool,
    suites: Vec<GeometryReport>,
}

fn validate(common: &Common, out: &mut dyn Write) -> Result<i32, Failure> {
    let exp = load(common)?;
    let rep = exp.validate().map_err(Failure::runtime)?;
    let summary = ValidateSummary { passed: rep.passed, suites: vec![rep] };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Failure::runtime(e.into()))?;
    let _ = writeln!(out, "{text}");
    Ok(if summary.passed { EXIT_OK } else { EXIT_GEOMETRY })
}

fn run(common: &Common, out: &mut dyn Write) -> Result<i32, Failure> {
    let exp = load(common)?;
    let stats = exp.run().map_err(Failure::runtime)?;
    export_results(&stats, None, &common.out).map_err(Failure::runtime)?;
    let _ = writeln!(
        out,
        "wrote {} ({} rows, {} paths)",
        common.out.join(CURVES_FILE).display(),
        stats.horizon + 1,
        stats.paths
    );
    Ok(EXIT_OK)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.6e}"))
}

fn audit_line(r: &AuditRecord) -> String {
    let status = match r.status {
        AuditStatus::Pass => "PASS",
        AuditStatus::Fail => "FAIL",
        AuditStatus::Unchecked => "UNCHECKED",
    };
    format!(
        "{status} {} eps={} index={} observed={} bound={} margin={} | {}",
        r.kind.label(),
        r.epsilon.map_or_else(|| "-".into(), |e| e.to_string()),
        r.predicted_index.map_or_else(|| "-".into(), |n| n.to_string()),
        fmt_opt(r.observed_value_at_index),
        fmt_opt(r.bound),
        fmt_opt(r.mc_margin),
        r.note
    )
}

fn audit(common: &Common, curves: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let exp = load(common)?;
    let cert = exp.certificate().map_err(|e| match e {
        Error::NoModulus(_) => Failure(EXIT_NO_MODULUS, e.to_string()),
        e => Failure::input(e),
    })?;
    let stats = match curves {
        Some(p) => read_curves(p).map_err(Failure::input)?,
        None => exp.run().map_err(Failure::runtime)?,
    };
    let report = exp.audit(&cert, &stats).map_err(Failure::runtime)?;
    for r in &report.records {
        let _ = writeln!(out, "{}", audit_line(r));
    }
    for cav in &report.caveats {
        let _ = writeln!(out, "note: {cav}");
    }
    export_results(&stats, Some(&report), &common.out).map_err(Failure::runtime)?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_AUDIT })
}

fn report(dir: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let rep = read_audit(&dir.join(AUDIT_FILE)).map_err(Failure::input)?;
    let stats = read_curves(&dir.join(CURVES_FILE)).map_err(Failure::input)?;
    if stats.paths != rep.paths || stats.horizon != rep.horizon {
        return Err(Failure(EXIT_INPUT, "audit.json and curves.csv describe different runs".into()));
    }
    let _ = write!(out, "{}", render_report(&rep, &stats));
    Ok(EXIT_OK)
}

/// Runs the parsed command, writing normal output to `out` and diagnostics
/// to `err`; returns the process exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let res = match &cli.command {
        Command::Validate(c) => validate(c, out),
        Command::Run(c) => run(c, out),
        Command::Audit { common, curves } => audit(common, curves.as_deref(), out),
        Command::Report { out: dir, config, .. } => {
            if let Some(cfg) = config {
                if let Err(e) = ExperimentConfig::load(cfg) {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_INPUT;
                }
            }
            report(dir, out)
        }
    };
    match res {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            code
        }
    }
}
