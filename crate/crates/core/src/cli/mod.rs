//! Command-line front end: JSON configs in, CSV traces and JSON summaries
//! out.
//!
//! Exit codes: `0` success, `1` schema or input error (nothing is computed),
//! `2` numerical failure or a failed `check` property. Every failure writes
//! a summary with a machine-readable `reason`.

pub mod check;
pub mod commands;
pub mod config;
pub mod defaults;
pub mod summary;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;

pub use commands::{execute, prepare, Job, Output};
pub use config::{parse_config, RunConfig, SchemaError};
pub use summary::{Reason, Status, Summary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "conic-uot",
    version,
    about = "Geodesics of the conical unbalanced transport models"
)]
pub struct Args {
    /// JSON run configuration; without it the `check` suite runs with defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV traces and JSON summaries.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for randomized suites; overrides seeds in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Result of a full invocation.
#[derive(Debug, Clone)]
pub struct Report {
    pub exit_code: i32,
    pub summaries: Vec<Summary>,
    pub lines: Vec<String>,
}

fn write(path: &Path, body: &str) -> std::io::Result<()> {
    fs::write(path, body)
}

fn valid_stem(stem: &str) -> bool {
    !stem.is_empty()
        && stem != "."
        && stem != ".."
        && !stem.contains(['/', '\\'])
        && stem != "config-error"
}

fn stems(runs: &[RunConfig]) -> Result<Vec<String>, SchemaError> {
    let batch = runs.len() > 1;
    let mut seen = BTreeSet::new();
    runs.iter()
        .enumerate()
        .map(|(i, r)| {
            let stem = match r.output() {
                Some(s) => s.to_string(),
                None if batch => format!("{i:02}-{}", r.command()),
                None => r.command().to_string(),
            };
            if !valid_stem(&stem) {
                return Err(SchemaError {
                    message: format!("invalid output name `{stem}`"),
                    run: Some(i),
                });
            }
            if !seen.insert(stem.clone()) {
                return Err(SchemaError {
                    message: format!("duplicate output name `{stem}`"),
                    run: Some(i),
                });
            }
            Ok(stem)
        })
        .collect()
}

fn config_error(out: &Path, err: &SchemaError) -> std::io::Result<Report> {
    let summary = Summary::new("config-error", "").failed(Reason::schema(err.to_string()));
    write(&out.join("config-error.json"), &summary.to_json())?;
    Ok(Report {
        exit_code: EXIT_SCHEMA,
        lines: vec![format!("schema error: {err}")],
        summaries: vec![summary],
    })
}

/// Validates every run, then executes them in order. Output files are
/// `<out>/<name>.csv` (when the run produces a trace) and `<out>/<name>.json`.
pub fn run(runs: &[RunConfig], out: &Path, seed: Option<u64>) -> std::io::Result<Report> {
    fs::create_dir_all(out)?;
    let names = match stems(runs) {
        Ok(n) => n,
        Err(e) => return config_error(out, &e),
    };
    let mut jobs = Vec::with_capacity(runs.len());
    let mut rejected = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        match prepare(r) {
            Ok(j) => jobs.push(Some(j)),
            Err(e) => {
                jobs.push(None);
                rejected.push((i, e));
            }
        }
    }
    if !rejected.is_empty() {
        let mut report = Report {
            exit_code: EXIT_SCHEMA,
            summaries: Vec::new(),
            lines: Vec::new(),
        };
        for (i, e) in rejected {
            let s = Summary::new(&names[i], runs[i].command())
                .failed(Reason::schema(e.message.clone()));
            write(&out.join(format!("{}.json", names[i])), &s.to_json())?;
            report
                .lines
                .push(format!("{}: schema error: {}", names[i], e.message));
            report.summaries.push(s);
        }
        return Ok(report);
    }

    let mut report = Report {
        exit_code: EXIT_OK,
        summaries: Vec::new(),
        lines: Vec::new(),
    };
    for ((r, job), name) in runs.iter().zip(jobs.into_iter().flatten()).zip(&names) {
        let base = Summary::new(name, r.command());
        let summary = match execute(&job, seed) {
            Ok(output) => {
                let mut s = base;
                if let Some(trace) = &output.trace {
                    let file = format!("{name}.csv");
                    write(&out.join(&file), &trace.to_csv())?;
                    s = s.with_trace(trace, file);
                }
                s.convergence = output.convergence;
                s.result = output.result;
                if !output.passed {
                    s = s.failed(Reason {
                        kind: "check_failed".into(),
                        message: "one or more properties failed".into(),
                        step: None,
                    });
                    report.exit_code = report.exit_code.max(EXIT_NUMERICAL);
                }
                report
                    .lines
                    .extend(output.lines.into_iter().map(|l| format!("{name}: {l}")));
                s
            }
            Err(e) => {
                let code = if e.is_numerical() {
                    EXIT_NUMERICAL
                } else {
                    EXIT_SCHEMA
                };
                report.exit_code = report.exit_code.max(code);
                report.lines.push(format!("{name}: error: {e}"));
                base.failed(Reason::from_error(&e))
            }
        };
        write(&out.join(format!("{name}.json")), &summary.to_json())?;
        report.summaries.push(summary);
    }
    Ok(report)
}

/// Entry point shared by the binary: parses `args`, runs, prints one line
/// per event and returns the exit code.
pub fn main_with_args(args: Args) -> i32 {
    let runs = match &args.config {
        None => vec![RunConfig::Check(config::CheckConfig::default())],
        Some(path) => {
            let parsed = fs::read_to_string(path)
                .map_err(|e| SchemaError {
                    message: format!("cannot read {}: {e}", path.display()),
                    run: None,
                })
                .and_then(|text| parse_config(&text));
            match parsed {
                Ok(r) => r,
                Err(e) => {
                    let reason = Reason::schema(e.to_string());
                    if fs::create_dir_all(&args.out).is_ok() {
                        let _ = config_error(&args.out, &e);
                    }
                    eprintln!(
                        "{}",
                        serde_json::to_string(&reason).expect("reason serializes")
                    );
                    return EXIT_SCHEMA;
                }
            }
        }
    };
    match run(&runs, &args.out, args.seed) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            report.exit_code
        }
        Err(e) => {
            let reason = Reason {
                kind: "io_error".into(),
                message: e.to_string(),
                step: None,
            };
            eprintln!(
                "{}",
                serde_json::to_string(&reason).expect("reason serializes")
            );
            EXIT_SCHEMA
        }
    }
}
