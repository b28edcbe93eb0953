//! Versioned files passed between stages.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use cyic_core::phase::{AnnualActivity, PeriodGrowth};
use cyic_core::report::PartnerTimeline;
use cyic_core::taxonomy::ClassificationSummary;
use cyic_core::{
    CorpusStats, CountingMode, DetectionParams, IngestMode, PhaseSegmentation, SegmentationRules, YearWindow,
    SCHEMA_VERSION,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CORPUS_STATS: &str = "corpus_stats.json";
pub const PAIR_COUNTS: &str = "pair_counts.tsv";
pub const METRICS: &str = "metrics.tsv";
pub const EVENTS_JSONL: &str = "events.jsonl";
pub const EVENTS_CSV: &str = "events.csv";
pub const DETECT_SUMMARY: &str = "detect_summary.json";
pub const SEGMENTATION: &str = "segmentation.json";
pub const RANKINGS_DIR: &str = "rankings";
pub const RANKINGS: &str = "rankings.json";
pub const DELTA_CSV: &str = "delta_matrix.csv";
pub const DELTA_JSON: &str = "delta_matrix.json";
pub const PARTNER_TIMELINE: &str = "partner_timeline.json";
pub const TIMELINE: &str = "timeline.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusStatsFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub stats: CorpusStats,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DetectSummary {
    pub schema_version: u32,
    pub window: YearWindow,
    pub counting: CountingMode,
    pub ingest: IngestMode,
    pub params: DetectionParams,
    pub pair_count: usize,
    /// Absent when no pair survived aggregation.
    pub global_median: Option<f64>,
    pub event_count: usize,
    /// Resolved in-window citations per year, all subjects.
    pub annual_citations: Vec<u64>,
    pub classification: Option<ClassificationSummary>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentationFile {
    pub schema_version: u32,
    pub window: YearWindow,
    pub rules: SegmentationRules,
    pub activity: Vec<AnnualActivity>,
    #[serde(flatten)]
    pub segmentation: PhaseSegmentation,
    pub growth: Vec<PeriodGrowth>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PartnerBundle {
    pub schema_version: u32,
    pub timelines: Vec<PartnerTimeline>,
}

pub fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn finish(mut w: BufWriter<File>, path: &Path) -> anyhow::Result<()> {
    w.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    let path = dir.join(name);
    let mut w = create(&path)?;
    cyic_core::report::write_json(value, &mut w).with_context(|| format!("writing {}", path.display()))?;
    finish(w, &path)
}

/// Opens an artifact from an earlier stage, mapping absence to a
/// prerequisite error that names the stage to run.
pub fn open_prior(dir: &Path, name: &str, stage: &'static str) -> anyhow::Result<BufReader<File>> {
    let path = dir.join(name);
    match File::open(&path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(CliError::MissingPrerequisite { file: path, stage }.into())
        }
        Err(e) => Err(anyhow::Error::new(e).context(format!("opening {}", path.display()))),
    }
}

/// Reads a JSON artifact and refuses it unless its `schema_version` matches.
pub fn read_json<T: DeserializeOwned>(dir: &Path, name: &str, stage: &'static str) -> anyhow::Result<T> {
    let path = dir.join(name);
    let value: serde_json::Value = serde_json::from_reader(open_prior(dir, name, stage)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0);
    if found != u64::from(SCHEMA_VERSION) {
        return Err(CliError::SchemaMismatch {
            file: path,
            found,
            expected: SCHEMA_VERSION,
        }
        .into());
    }
    serde_json::from_value(value).with_context(|| format!("parsing {}", path.display()))
}
