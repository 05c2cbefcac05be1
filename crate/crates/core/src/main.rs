// SPDX-License-Identifier: Apache-2.0

//! `sojourn run` command-line front end.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sojourn::config::{self, ConfigError};
use sojourn::report::{self, Report, ReportOptions};
use sojourn::sim::{self, Scenario};

#[derive(Debug, Parser)]
#[command(name = "sojourn", version, about = "Queue-delay estimator simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more scenario files.
    Run(RunArgs),
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Scenario files; each writes into `<out>/<file stem>/`.
    #[arg(required = true)]
    scenarios: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated reports: trace, lag-matrix, idle-tail, mark-spacing,
    /// error-stats.
    #[arg(long, value_delimiter = ',', default_value = "trace")]
    report: Vec<String>,
    /// Override a scenario key, e.g. `--set drain.rate=5Mb/s` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Lag-matrix threshold.
    #[arg(long, default_value = "20ms")]
    lag_threshold: String,
    /// Lag-matrix overload onset.
    #[arg(long, default_value = "0ns")]
    lag_onset: String,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn exit(&self) -> ExitCode {
        match self {
            Failure::Config(m) => {
                eprintln!("config error: {m}");
                ExitCode::from(1)
            }
            Failure::Runtime(m) => {
                eprintln!("error: {m}");
                ExitCode::from(2)
            }
        }
    }
}

fn config_err(path: &Path, e: ConfigError) -> Failure {
    Failure::Config(format!("{}: {e}", path.display()))
}

struct Job {
    path: PathBuf,
    dir: PathBuf,
    scenario: Scenario,
}

fn prepare(args: &RunArgs) -> Result<(Vec<Job>, ReportOptions), Failure> {
    let mut reports = Vec::new();
    for r in &args.report {
        let r: Report = r.trim().parse().map_err(Failure::Config)?;
        if !reports.contains(&r) {
            reports.push(r);
        }
    }
    let opts = ReportOptions {
        reports,
        lag_threshold: config::parse_time(&args.lag_threshold)
            .map_err(|m| Failure::Config(format!("--lag-threshold: {m}")))?,
        lag_onset: config::parse_time(&args.lag_onset)
            .map_err(|m| Failure::Config(format!("--lag-onset: {m}")))?,
    };
    let mut overrides = Vec::new();
    for s in &args.set {
        overrides.push(config::parse_override(s).map_err(|e| Failure::Config(e.to_string()))?);
    }
    if let Some(seed) = args.seed {
        overrides.push(("seed".to_string(), seed.to_string()));
    }

    let mut stems = HashSet::new();
    let mut jobs = Vec::new();
    for path in &args.scenarios {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        let scenario = config::parse_scenario_with(&text, &overrides).map_err(|e| config_err(path, e))?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("scenario")
            .to_string();
        if !stems.insert(stem.clone()) {
            return Err(Failure::Config(format!(
                "{}: another scenario already writes to `{stem}`",
                path.display()
            )));
        }
        jobs.push(Job {
            path: path.clone(),
            dir: args.out.join(stem),
            scenario,
        });
    }
    Ok((jobs, opts))
}

fn run_job(job: &Job, opts: &ReportOptions) -> Result<String, String> {
    let out = sim::run(&job.scenario).map_err(|e| format!("{}: {e}", job.path.display()))?;
    fs::create_dir_all(&job.dir).map_err(|e| format!("{}: {e}", job.dir.display()))?;
    let emitted = report::emit_reports(&job.scenario, &out, opts, &job.dir).map_err(|e| e.to_string())?;
    let s = out.stats;
    let mut text = format!(
        "{}: {} offered, {} delivered, {} tail-dropped, {} aqm-dropped, {} marked, final backlog {} B\n",
        job.path.display(),
        s.offered_packets,
        s.delivered_packets,
        s.tail_dropped_packets,
        s.aqm_dropped_packets,
        s.aqm_marks,
        s.final_backlog
    );
    for f in &emitted.files {
        text.push_str(&format!("  wrote {}\n", f.display()));
    }
    if let Some(table) = emitted.lag_table {
        text.push_str(&table);
    }
    Ok(text)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let (jobs, opts) = prepare(&args)?;
    // scenarios are independent; run them in parallel, print in input order
    let results: Vec<Result<String, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|job| scope.spawn(|| run_job(job, &opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("scenario run panicked".to_string())))
            .collect()
    });
    let mut failed = false;
    for r in results {
        match r {
            Ok(text) => print!("{text}"),
            Err(m) => {
                eprintln!("error: {m}");
                failed = true;
            }
        }
    }
    if failed {
        Err(Failure::Runtime("one or more scenarios failed".into()))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // bad flags count as configuration errors; help and version are not errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(f) => f.exit(),
        },
    }
}
