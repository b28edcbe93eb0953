//! Annual cross-cluster activity and development-phase turning points.
//!
//! Two rule families mark a turning point at year `τ`:
//!
//! * **emergence**: both the cross-cluster event count and the number of
//!   participating clusters jump to at least a multiple of their maxima over
//!   all earlier years;
//! * **acceleration**: on a base above a threshold, the year-on-year growth
//!   of the event count exceeds a rate.
//!
//! Firings that follow an earlier firing within the collapse window are
//! folded into it, so a sustained ramp yields a single turning point.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::CyicEvent;
use crate::rounding;
use crate::taxonomy::{ClusterMap, TaxonomyError};
use crate::window::YearWindow;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("need at least 3 years of activity, got {0}")]
    TooShort(usize),
    #[error("activity years must be consecutive and ascending")]
    NotConsecutive,
    #[error("segmentation rule {0} must be positive")]
    InvalidRule(&'static str),
    #[error("annual citation vector has {got} entries for a {want}-year window")]
    CitationLength { got: usize, want: usize },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnualActivity {
    pub year: i32,
    pub cross_cluster_events: u64,
    pub participating_clusters: u64,
    pub total_citations: u64,
}

/// Per-year cross-cluster counts for every year of `window`.
pub fn annual_activity(
    events: &[CyicEvent],
    map: &ClusterMap,
    window: YearWindow,
    annual_citations: &[u64],
) -> Result<Vec<AnnualActivity>, PhaseError> {
    if annual_citations.len() != window.len() {
        return Err(PhaseError::CitationLength {
            got: annual_citations.len(),
            want: window.len(),
        });
    }
    let n = window.len();
    let mut counts = vec![0u64; n];
    let mut clusters: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); n];
    for e in events {
        let Some(i) = window.index_of(e.year) else {
            continue;
        };
        let (x, y) = map.event_clusters(e)?;
        if x == y {
            continue;
        }
        counts[i] += 1;
        clusters[i].insert(x);
        clusters[i].insert(y);
    }
    Ok((0..n)
        .map(|i| AnnualActivity {
            year: window.year_at(i),
            cross_cluster_events: counts[i],
            participating_clusters: clusters[i].len() as u64,
            total_citations: annual_citations[i],
        })
        .collect())
}

/// What the emergence multipliers are applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmergenceBaseline {
    /// Maximum over all earlier years.
    #[default]
    Max,
    /// Mean over all earlier years.
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationRules {
    pub emergence_count_multiplier: f64,
    pub emergence_cluster_multiplier: f64,
    pub acceleration_growth_threshold: f64,
    pub acceleration_base_threshold: f64,
    pub emergence_baseline: EmergenceBaseline,
    /// Firings this many years or fewer after the previous firing collapse.
    pub collapse_years: u32,
}

impl Default for SegmentationRules {
    fn default() -> Self {
        SegmentationRules {
            emergence_count_multiplier: 2.0,
            emergence_cluster_multiplier: 2.0,
            acceleration_growth_threshold: 0.5,
            acceleration_base_threshold: 100.0,
            emergence_baseline: EmergenceBaseline::Max,
            collapse_years: 2,
        }
    }
}

impl SegmentationRules {
    pub fn validate(&self) -> Result<(), PhaseError> {
        let checks = [
            (self.emergence_count_multiplier, "emergence_count_multiplier"),
            (self.emergence_cluster_multiplier, "emergence_cluster_multiplier"),
            (self.acceleration_growth_threshold, "acceleration_growth_threshold"),
            (self.acceleration_base_threshold, "acceleration_base_threshold"),
        ];
        for (v, name) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PhaseError::InvalidRule(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurningKind {
    Emergence,
    Acceleration,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Firing {
    pub year: i32,
    pub kind: TurningKind,
    /// `true` when folded into an earlier firing.
    pub collapsed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub label: String,
    pub start: i32,
    pub end: i32,
}

impl Period {
    pub fn years(&self) -> u64 {
        (self.end - self.start + 1) as u64
    }

    pub fn contains(&self, year: i32) -> bool {
        year >= self.start && year <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSegmentation {
    pub turning_points: Vec<i32>,
    pub periods: Vec<Period>,
    /// Every rule firing, including collapsed ones.
    pub firings: Vec<Firing>,
}

impl PhaseSegmentation {
    /// Splits `window` at the given turning points.
    pub fn from_turning_points(window: YearWindow, turning_points: Vec<i32>) -> Self {
        let mut periods = Vec::with_capacity(turning_points.len() + 1);
        let mut start = window.start();
        for &tp in &turning_points {
            debug_assert!(tp > start && tp <= window.end());
            periods.push((start, tp - 1));
            start = tp;
        }
        periods.push((start, window.end()));
        PhaseSegmentation {
            turning_points,
            periods: periods
                .into_iter()
                .enumerate()
                .map(|(i, (start, end))| Period {
                    label: roman(i as u32 + 1),
                    start,
                    end,
                })
                .collect(),
            firings: Vec::new(),
        }
    }

    pub fn period_of(&self, year: i32) -> Option<&Period> {
        self.periods.iter().find(|p| p.contains(year))
    }

    pub fn period(&self, label: &str) -> Option<&Period> {
        self.periods.iter().find(|p| p.label == label)
    }
}

/// Upper-case Roman numeral for `1..=3999`.
pub fn roman(mut n: u32) -> String {
    const TABLE: [(u32, &str); 13] = [
        (1000, "M"),
        (900, "CM"),
        (500, "D"),
        (400, "CD"),
        (100, "C"),
        (90, "XC"),
        (50, "L"),
        (40, "XL"),
        (10, "X"),
        (9, "IX"),
        (5, "V"),
        (4, "IV"),
        (1, "I"),
    ];
    let mut out = String::new();
    for (value, glyph) in TABLE {
        while n >= value {
            out.push_str(glyph);
            n -= value;
        }
    }
    out
}

fn emergence_fires(history: &[AnnualActivity], current: &AnnualActivity, rules: &SegmentationRules) -> bool {
    if history.is_empty() {
        return false;
    }
    let (count_base, cluster_base) = match rules.emergence_baseline {
        EmergenceBaseline::Max => (
            history.iter().map(|a| a.cross_cluster_events).max().unwrap_or(0) as f64,
            history.iter().map(|a| a.participating_clusters).max().unwrap_or(0) as f64,
        ),
        EmergenceBaseline::Mean => {
            let n = history.len() as f64;
            (
                history.iter().map(|a| a.cross_cluster_events).sum::<u64>() as f64 / n,
                history.iter().map(|a| a.participating_clusters).sum::<u64>() as f64 / n,
            )
        }
    };
    let base_ok = match rules.emergence_baseline {
        EmergenceBaseline::Max => count_base >= 1.0 && cluster_base >= 1.0,
        EmergenceBaseline::Mean => count_base > 0.0 && cluster_base > 0.0,
    };
    base_ok
        && current.cross_cluster_events as f64 >= rules.emergence_count_multiplier * count_base
        && current.participating_clusters as f64 >= rules.emergence_cluster_multiplier * cluster_base
}

fn acceleration_fires(previous: &AnnualActivity, current: &AnnualActivity, rules: &SegmentationRules) -> bool {
    let base = previous.cross_cluster_events as f64;
    if base.partial_cmp(&rules.acceleration_base_threshold) != Some(std::cmp::Ordering::Greater) {
        return false;
    }
    (current.cross_cluster_events as f64 - base) / base > rules.acceleration_growth_threshold
}

pub fn detect_turning_points(
    activity: &[AnnualActivity],
    rules: &SegmentationRules,
) -> Result<PhaseSegmentation, PhaseError> {
    rules.validate()?;
    if activity.len() < 3 {
        return Err(PhaseError::TooShort(activity.len()));
    }
    if activity.windows(2).any(|w| w[1].year != w[0].year + 1) {
        return Err(PhaseError::NotConsecutive);
    }
    let window = YearWindow::new(activity[0].year, activity[activity.len() - 1].year).expect("ascending years");

    let mut firings = Vec::new();
    let mut last_fired: Option<i32> = None;
    for i in 1..activity.len() {
        let current = &activity[i];
        let emergence = emergence_fires(&activity[..i], current, rules);
        let acceleration = acceleration_fires(&activity[i - 1], current, rules);
        let kind = match (emergence, acceleration) {
            (true, true) => TurningKind::Both,
            (true, false) => TurningKind::Emergence,
            (false, true) => TurningKind::Acceleration,
            (false, false) => continue,
        };
        let collapsed = last_fired.is_some_and(|prev| current.year - prev <= rules.collapse_years as i32);
        last_fired = Some(current.year);
        firings.push(Firing {
            year: current.year,
            kind,
            collapsed,
        });
    }
    let points = firings.iter().filter(|f| !f.collapsed).map(|f| f.year).collect();
    let mut seg = PhaseSegmentation::from_turning_points(window, points);
    seg.firings = firings;
    Ok(seg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodGrowth {
    pub label: String,
    pub start: i32,
    pub end: i32,
    pub years: u64,
    pub total_events: u64,
    pub total_citations: u64,
    /// `total_events / years`, two decimals.
    pub per_year: String,
    /// Change of the per-year average relative to the previous period.
    pub change_vs_previous: Option<String>,
}

/// Per-period totals, per-year averages and period-to-period changes.
pub fn growth_stats(activity: &[AnnualActivity], segmentation: &PhaseSegmentation) -> Vec<PeriodGrowth> {
    let mut out: Vec<PeriodGrowth> = Vec::with_capacity(segmentation.periods.len());
    let mut previous: Option<(u64, u64)> = None;
    for p in &segmentation.periods {
        let in_period = activity.iter().filter(|a| p.contains(a.year));
        let (events, citations) = in_period.fold((0u64, 0u64), |(e, c), a| {
            (e + a.cross_cluster_events, c + a.total_citations)
        });
        let years = p.years();
        // Ratio of averages: (eb/yb − ea/ya) / (ea/ya) = (eb·ya − ea·yb) / (ea·yb).
        let change = previous.and_then(|(ea, ya)| {
            let num = (events as i128 * ya as i128 - ea as i128 * years as i128) * 100;
            let den = ea as i128 * years as i128;
            rounding::format_ratio(num, den, 2).ok().map(|s| format!("{s}%"))
        });
        out.push(PeriodGrowth {
            label: p.label.clone(),
            start: p.start,
            end: p.end,
            years,
            total_events: events,
            total_citations: citations,
            per_year: rounding::format_average(events, years).expect("periods are non-empty"),
            change_vs_previous: change,
        });
        previous = Some((events, years));
    }
    out
}
