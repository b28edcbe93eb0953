//! Critical-year detection over `z` series.
//!
//! A year `τ` of pair `c` is flagged when all three hold:
//!
//! 1. the pair's mean `z` exceeds the global median of `z`,
//! 2. the slope at `τ` exceeds `sigma_multiplier · σ(z_c)`,
//! 3. `z_τ` exceeds the pair's mean.
//!
//! All comparisons are strict.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregate::SubjectPair;
use crate::metrics::MetricSeries;

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("no surviving pairs to take a median over")]
    EmptyInput,
    #[error("slope undefined at {year}: no preceding year in the window")]
    UndefinedSlope { year: i32 },
    #[error("year {year} lies outside the series window")]
    OutsideWindow { year: i32 },
    #[error("sigma multiplier must be positive, got {0}")]
    InvalidMultiplier(f64),
}

/// Which values the condition-1 median is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MedianScope {
    /// Every year of every surviving pair, pooled.
    #[default]
    AllPairYearValues,
    /// One value per pair: its mean.
    PairMeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeMethod {
    /// `z_τ − z_{τ−1}`.
    #[default]
    BackwardDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaKind {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n − 1`.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionParams {
    pub sigma_multiplier: f64,
    pub median_scope: MedianScope,
    pub slope_method: SlopeMethod,
    pub sigma_kind: SigmaKind,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            sigma_multiplier: 2.0,
            median_scope: MedianScope::default(),
            slope_method: SlopeMethod::default(),
            sigma_kind: SigmaKind::default(),
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<(), DetectError> {
        if self.sigma_multiplier > 0.0 && self.sigma_multiplier.is_finite() {
            Ok(())
        } else {
            Err(DetectError::InvalidMultiplier(self.sigma_multiplier))
        }
    }
}

/// One detected critical year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyicEvent {
    #[serde(flatten)]
    pub pair: SubjectPair,
    pub year: i32,
    pub z_value: f64,
    pub slope: f64,
    pub pair_mean: f64,
    pub pair_sigma: f64,
    pub global_median: f64,
    /// Set once the event has been classified against a cluster map.
    pub cross_cluster: Option<bool>,
}

impl CyicEvent {
    /// Column order shared by the CSV and JSON-lines exports.
    pub const COLUMNS: [&'static str; 9] = [
        "a",
        "b",
        "year",
        "z_value",
        "slope",
        "pair_mean",
        "pair_sigma",
        "global_median",
        "cross_cluster",
    ];

    fn csv_row(&self) -> [String; 9] {
        [
            self.pair.a().to_string(),
            self.pair.b().to_string(),
            self.year.to_string(),
            self.z_value.to_string(),
            self.slope.to_string(),
            self.pair_mean.to_string(),
            self.pair_sigma.to_string(),
            self.global_median.to_string(),
            self.cross_cluster.map(|c| c.to_string()).unwrap_or_default(),
        ]
    }
}

fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (left, hi, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let hi = *hi;
    if n % 2 == 1 {
        hi
    } else {
        let lo = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo + hi) / 2.0
    }
}

/// Median used by condition 1. Even-sized multisets take the mean of the two
/// central values.
pub fn global_median(all: &[MetricSeries], scope: MedianScope) -> Result<f64, DetectError> {
    let mut values: Vec<f64> = match scope {
        MedianScope::AllPairYearValues => all.iter().flat_map(|s| s.z.iter().copied()).collect(),
        MedianScope::PairMeans => all.iter().map(|s| mean(&s.z)).collect(),
    };
    if values.is_empty() {
        return Err(DetectError::EmptyInput);
    }
    Ok(median_in_place(&mut values))
}

fn mean(z: &[f64]) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    z.iter().sum::<f64>() / z.len() as f64
}

/// Mean and standard deviation of a pair's `z` over the whole window,
/// zeros included.
pub fn pair_stats(series: &MetricSeries, params: &DetectionParams) -> (f64, f64) {
    let z = &series.z;
    let m = mean(z);
    let ss: f64 = z.iter().map(|v| (v - m) * (v - m)).sum();
    let denom = match params.sigma_kind {
        SigmaKind::Population => z.len(),
        SigmaKind::Sample => z.len().saturating_sub(1),
    };
    let sigma = if denom == 0 { 0.0 } else { (ss / denom as f64).sqrt() };
    (m, sigma)
}

pub fn slope_at(series: &MetricSeries, year: i32, params: &DetectionParams) -> Result<f64, DetectError> {
    let i = series
        .window
        .index_of(year)
        .ok_or(DetectError::OutsideWindow { year })?;
    if i == 0 {
        return Err(DetectError::UndefinedSlope { year });
    }
    match params.slope_method {
        SlopeMethod::BackwardDifference => Ok(series.z[i] - series.z[i - 1]),
    }
}

/// Evaluates the three conditions for one pair against a known median.
pub fn detect_pair(series: &MetricSeries, params: &DetectionParams, global_median: f64) -> Vec<CyicEvent> {
    let (pair_mean, pair_sigma) = pair_stats(series, params);
    if pair_mean.partial_cmp(&global_median) != Some(Ordering::Greater) {
        return Vec::new();
    }
    let threshold = params.sigma_multiplier * pair_sigma;
    (1..series.len())
        .filter_map(|i| {
            let year = series.window.year_at(i);
            let slope = slope_at(series, year, params).ok()?;
            let z = series.z[i];
            (slope > threshold && z > pair_mean).then(|| CyicEvent {
                pair: series.pair.clone(),
                year,
                z_value: z,
                slope,
                pair_mean,
                pair_sigma,
                global_median,
                cross_cluster: None,
            })
        })
        .collect()
}

fn event_order(a: &CyicEvent, b: &CyicEvent) -> Ordering {
    a.year.cmp(&b.year).then_with(|| a.pair.cmp(&b.pair))
}

/// Runs detection with an externally fixed median. Output sorted by
/// `(year, pair)`.
pub fn detect_with_median(
    all: &[MetricSeries],
    params: &DetectionParams,
    global_median: f64,
) -> Result<Vec<CyicEvent>, DetectError> {
    params.validate()?;
    let mut events: Vec<CyicEvent> = all
        .par_iter()
        .flat_map_iter(|s| detect_pair(s, params, global_median))
        .collect();
    events.sort_by(event_order);
    Ok(events)
}

/// Full two-pass detection: global median first, then per-pair conditions.
pub fn detect(all: &[MetricSeries], params: &DetectionParams) -> Result<Vec<CyicEvent>, DetectError> {
    params.validate()?;
    let median = global_median(all, params.median_scope)?;
    detect_with_median(all, params, median)
}

pub fn write_events_jsonl<W: std::io::Write>(events: &[CyicEvent], mut out: W) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_events_jsonl<R: std::io::BufRead>(input: R) -> Result<Vec<CyicEvent>, serde_json::Error> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line.map_err(serde_json::Error::io)?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line)?);
    }
    Ok(events)
}

pub fn write_events_csv<W: std::io::Write>(events: &[CyicEvent], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CyicEvent::COLUMNS)?;
    for e in events {
        w.write_record(e.csv_row())?;
    }
    w.flush()?;
    Ok(())
}
