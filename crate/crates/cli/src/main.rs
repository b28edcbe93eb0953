//! `cyic`: critical-year detection over a subject-labelled citation corpus.
//!
//! Stages share one output directory. `detect` reads the raw corpus;
//! `segment` and `report` read the versioned files written before them.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod artifacts;
mod commands;
mod config;
mod error;

use config::{CommonArgs, RunConfig};
use error::{CliError, ErrorReport};

#[derive(Debug, Parser)]
#[command(
    name = "cyic",
    version,
    about = "Detect critical years for interdisciplinary citations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read papers and citations and write corpus_stats.json.
    Ingest(CommonArgs),
    /// Aggregate pair series, score them and write the event list.
    Detect(CommonArgs),
    /// Split the window into development periods from detected events.
    Segment(CommonArgs),
    /// Write rankings, the delta matrix, partner timelines and the timeline export.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Generate a synthetic corpus with planted events from a scenario file.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Scenario JSON.
        #[arg(long, value_name = "FILE")]
        scenario: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Default, Args)]
struct ReportArgs {
    /// Cluster to build a partner timeline for; repeatable [default: every cluster with events].
    #[arg(long, value_name = "CLUSTER")]
    focal: Vec<String>,
    /// Partners kept per year in partner timelines [default: 3].
    #[arg(long = "top-k", value_name = "K")]
    top_k: Option<usize>,
    /// Earlier period of the delta matrix [default: second to last].
    #[arg(long = "period-a", value_name = "LABEL")]
    period_a: Option<String>,
    /// Later period of the delta matrix [default: last].
    #[arg(long = "period-b", value_name = "LABEL")]
    period_b: Option<String>,
    /// Keep the General cluster in the delta matrix.
    #[arg(long = "include-general")]
    include_general: bool,
}

impl ReportArgs {
    fn apply(self, cfg: &mut RunConfig) {
        let r = &mut cfg.report;
        if !self.focal.is_empty() {
            r.focal = Some(self.focal);
        }
        r.top_k = self.top_k.or(r.top_k);
        r.period_a = self.period_a.or(r.period_a.take());
        r.period_b = self.period_b.or(r.period_b.take());
        if self.include_general {
            r.include_general = Some(true);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let common = match &cli.command {
        Command::Ingest(c) | Command::Detect(c) | Command::Segment(c) => c,
        Command::Report { common, .. } | Command::Simulate { common, .. } => common,
    };
    let mut cfg = RunConfig::resolve(common)?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cfg.threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| CliError::Config(e.to_string()))?
    };
    pool.install(|| match cli.command {
        Command::Ingest(_) => commands::ingest(&cfg),
        Command::Detect(_) => commands::detect(&cfg),
        Command::Segment(_) => commands::segment(&cfg),
        Command::Report { report, .. } => {
            report.apply(&mut cfg);
            commands::report(&cfg)
        }
        Command::Simulate { scenario, .. } => commands::simulate(&cfg, scenario.as_ref()),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport::from_anyhow(&e);
            eprintln!("{}", serde_json::to_string(&report).expect("error report serializes"));
            ExitCode::from(report.exit_code as u8)
        }
    }
}
