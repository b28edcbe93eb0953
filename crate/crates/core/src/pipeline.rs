//! End-to-end detection run over a pair of input files.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::{self, AggregateError, CountingMode, PairTable};
use crate::corpus::{CorpusStats, IngestError, IngestMode, PaperIndex};
use crate::detect::{self, CyicEvent, DetectError, DetectionParams};
use crate::metrics::{self, MetricSeries};
use crate::window::YearWindow;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Detect(#[from] DetectError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub window: YearWindow,
    pub counting: CountingMode,
    pub ingest: IngestMode,
    pub params: DetectionParams,
}

impl PipelineConfig {
    pub fn new(window: YearWindow) -> Self {
        PipelineConfig {
            window,
            counting: CountingMode::Full,
            ingest: IngestMode::Lenient,
            params: DetectionParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DetectionRun {
    pub index: PaperIndex,
    pub stats: CorpusStats,
    pub table: PairTable,
    pub metrics: Vec<MetricSeries>,
    /// `None` when no pair survived aggregation.
    pub global_median: Option<f64>,
    pub events: Vec<CyicEvent>,
}

/// Computes metric series for every surviving pair, in pair order.
pub fn metric_table(table: &PairTable) -> Vec<MetricSeries> {
    table.series.par_iter().map(metrics::compute_metric_series).collect()
}

/// Metric series, global median and events of one detection pass.
pub type Detection = (Vec<MetricSeries>, Option<f64>, Vec<CyicEvent>);

/// Runs detection on an already aggregated table.
pub fn detect_table(table: &PairTable, params: &DetectionParams) -> Result<Detection, DetectError> {
    params.validate()?;
    let metrics = metric_table(table);
    if metrics.is_empty() {
        return Ok((metrics, None, Vec::new()));
    }
    let median = detect::global_median(&metrics, params.median_scope)?;
    let events = detect::detect_with_median(&metrics, params, median)?;
    Ok((metrics, Some(median), events))
}

/// ingest → aggregate → metrics → detect.
pub fn run_detection(papers: &Path, citations: &Path, config: &PipelineConfig) -> Result<DetectionRun, PipelineError> {
    config.params.validate()?;
    let index = PaperIndex::from_path(papers, config.ingest)?;
    let (table, edges) = aggregate::aggregate_file(citations, &index, config.window, config.counting, config.ingest)?;
    let stats = CorpusStats::new(&index, &edges);
    let (metrics, global_median, events) = detect_table(&table, &config.params)?;
    Ok(DetectionRun {
        index,
        stats,
        table,
        metrics,
        global_median,
        events,
    })
}
