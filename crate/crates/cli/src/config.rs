use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use cyic_core::phase::SegmentationRules;
use cyic_core::{CountingMode, DetectionParams, IngestMode, YearWindow};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_WINDOW: &str = "1981:2020";

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration. Flags given on the command line take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Papers file (`paper_id<TAB>year<TAB>subjects`), optionally gzipped.
    #[arg(long, value_name = "FILE")]
    pub papers: Option<PathBuf>,
    /// Citations file (`citing_id<TAB>cited_id`), optionally gzipped.
    #[arg(long, value_name = "FILE")]
    pub citations: Option<PathBuf>,
    /// Subject-to-cluster map (`subject<TAB>cluster<TAB>group`).
    #[arg(long, value_name = "FILE")]
    pub clusters: Option<PathBuf>,
    /// Analysis window as START:END, inclusive [default: 1981:2020].
    #[arg(long, value_name = "START:END")]
    pub window: Option<YearWindow>,
    /// Output directory shared by all stages.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Slope threshold in units of the pair's standard deviation [default: 2.0].
    #[arg(long = "sigma-mult", value_name = "X")]
    pub sigma_mult: Option<f64>,
    /// How multi-subject papers split an edge [default: full].
    #[arg(long, value_name = "full|fractional")]
    pub counting: Option<CountingMode>,
    /// Abort on the first malformed row instead of skipping it.
    #[arg(long)]
    pub strict: bool,
    /// Worker threads for aggregation and detection [default: all cores].
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Seed for stochastic simulation; overrides the scenario's own seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportOptions {
    pub focal: Option<Vec<String>>,
    pub top_k: Option<usize>,
    pub period_a: Option<String>,
    pub period_b: Option<String>,
    pub include_general: Option<bool>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub papers: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub clusters: Option<PathBuf>,
    pub window: Option<String>,
    pub out: Option<PathBuf>,
    pub counting: Option<CountingMode>,
    pub strict: Option<bool>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub scenario: Option<PathBuf>,
    pub detection: Option<DetectionParams>,
    pub segmentation: Option<SegmentationRules>,
    pub report: Option<ReportOptions>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())).into())
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub papers: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub clusters: Option<PathBuf>,
    /// `None` when neither a flag nor the config file named one.
    pub window: Option<YearWindow>,
    pub out: Option<PathBuf>,
    pub counting: CountingMode,
    pub ingest: IngestMode,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub scenario: Option<PathBuf>,
    pub params: DetectionParams,
    pub rules: SegmentationRules,
    pub report: ReportOptions,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let file_window = file
            .window
            .as_deref()
            .map(str::parse::<YearWindow>)
            .transpose()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let mut params = file.detection.unwrap_or_default();
        if let Some(s) = args.sigma_mult {
            params.sigma_multiplier = s;
        }
        params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let rules = file.segmentation.unwrap_or_default();
        rules.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let strict = args.strict || file.strict.unwrap_or(false);
        let threads = args.threads.or(file.threads);
        if threads == Some(0) {
            return Err(CliError::Config("--threads must be at least 1".into()).into());
        }
        Ok(RunConfig {
            papers: args.papers.clone().or(file.papers),
            citations: args.citations.clone().or(file.citations),
            clusters: args.clusters.clone().or(file.clusters),
            window: args.window.or(file_window),
            out: args.out.clone().or(file.out),
            counting: args.counting.or(file.counting).unwrap_or_default(),
            ingest: if strict {
                IngestMode::Strict
            } else {
                IngestMode::Lenient
            },
            threads,
            seed: args.seed.or(file.seed),
            scenario: file.scenario,
            params,
            rules,
            report: file.report.unwrap_or_default(),
        })
    }

    pub fn window_or_default(&self) -> YearWindow {
        self.window
            .unwrap_or_else(|| DEFAULT_WINDOW.parse().expect("default window parses"))
    }

    pub fn require<'a>(&self, value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
        value
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("--{flag} is required")))
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        self.require(&self.out, "out")
    }
}
