//! Derived analyses over classified events: per-period cluster rankings,
//! period-to-period delta matrices, focal-cluster partner timelines and the
//! full per-cluster timeline consumed by figure renderers.
//!
//! A cross-cluster event counts once for each of its two endpoint clusters,
//! so ranking columns always sum to twice the number of unique events.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::PaperIndex;
use crate::detect::CyicEvent;
use crate::phase::{Period, PhaseSegmentation};
use crate::rounding;
use crate::taxonomy::{self, ClusterMap, Group, TaxonomyError, UNASSIGNED};
use crate::window::YearWindow;
use crate::SCHEMA_VERSION;

pub use crate::rounding::format_percentage;

/// Cluster left out of delta matrices unless asked for.
pub const GENERAL_CLUSTER: &str = "General";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown period {0:?}")]
    UnknownPeriod(String),
    #[error("unknown cluster {0:?}")]
    UnknownCluster(String),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
}

/// `(cluster_a, cluster_b)` in alphabetical order.
fn ordered<'a>(x: &'a str, y: &'a str) -> (&'a str, &'a str) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: usize,
    pub cluster: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPeriodRanking {
    pub period: String,
    pub start: i32,
    pub end: i32,
    pub rows: Vec<RankRow>,
    pub unique_events: u64,
    pub per_year: String,
}

impl ClusterPeriodRanking {
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "cluster", "count"])?;
        for r in &self.rows {
            w.write_record([r.rank.to_string(), r.cluster.clone(), r.count.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn rank_period(
    events: &[CyicEvent],
    period: &Period,
    universe: &BTreeSet<&str>,
    map: &ClusterMap,
) -> Result<ClusterPeriodRanking, ReportError> {
    let mut counts: BTreeMap<&str, u64> = universe.iter().map(|&c| (c, 0)).collect();
    let mut unique = 0u64;
    for e in events.iter().filter(|e| period.contains(e.year)) {
        let (x, y) = map.event_clusters(e)?;
        if x == y {
            continue;
        }
        unique += 1;
        *counts.entry(x).or_default() += 1;
        *counts.entry(y).or_default() += 1;
    }
    let mut rows: Vec<(&str, u64)> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(ClusterPeriodRanking {
        period: period.label.clone(),
        start: period.start,
        end: period.end,
        rows: rows
            .into_iter()
            .enumerate()
            .map(|(i, (cluster, count))| RankRow {
                rank: i + 1,
                cluster: cluster.to_string(),
                count,
            })
            .collect(),
        unique_events: unique,
        per_year: rounding::format_average(unique, period.years()).expect("periods are non-empty"),
    })
}

/// One ranking per period, counts descending with alphabetical tie-break.
pub fn rank_clusters(
    events: &[CyicEvent],
    segmentation: &PhaseSegmentation,
    map: &ClusterMap,
) -> Result<Vec<ClusterPeriodRanking>, ReportError> {
    let universe = taxonomy::clusters_in_use(map, events)?;
    segmentation
        .periods
        .iter()
        .map(|p| rank_period(events, p, &universe, map))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingBundle {
    pub schema_version: u32,
    pub rankings: Vec<ClusterPeriodRanking>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaMatrix {
    pub schema_version: u32,
    pub period_a: String,
    pub period_b: String,
    pub clusters: Vec<String>,
    /// `matrix[i][j] = count_b(i, j) − count_a(i, j)`; the diagonal holds
    /// intra-cluster deltas.
    pub matrix: Vec<Vec<i64>>,
    /// Sum of the off-diagonal entries of each row.
    pub row_totals: Vec<i64>,
}

impl DeltaMatrix {
    pub fn get(&self, x: &str, y: &str) -> Option<i64> {
        let i = self.clusters.iter().position(|c| c == x)?;
        let j = self.clusters.iter().position(|c| c == y)?;
        Some(self.matrix[i][j])
    }

    /// Header row of cluster names plus a `total` column.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["cluster".to_string()];
        header.extend(self.clusters.iter().cloned());
        header.push("total".into());
        w.write_record(&header)?;
        for (i, row) in self.matrix.iter().enumerate() {
            let mut rec = vec![self.clusters[i].clone()];
            rec.extend(row.iter().map(i64::to_string));
            rec.push(self.row_totals[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn pair_counts<'m>(
    events: &[CyicEvent],
    period: &Period,
    map: &'m ClusterMap,
) -> Result<BTreeMap<(&'m str, &'m str), i64>, ReportError> {
    let mut counts = BTreeMap::new();
    for e in events.iter().filter(|e| period.contains(e.year)) {
        let (x, y) = map.event_clusters(e)?;
        *counts.entry(ordered(x, y)).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Natural clusters first, then humanities & social, then ungrouped; each
/// block alphabetical.
fn matrix_order<'a>(map: &ClusterMap, clusters: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    let mut v: Vec<&str> = clusters.into_iter().collect();
    v.sort_by_key(|c| {
        let rank = match map.group_of(c) {
            Some(Group::Natural) => 0,
            Some(Group::HumanitiesSocial) => 1,
            None => 2,
        };
        (rank, *c)
    });
    v
}

/// Pairwise change in event counts from `period_a` to `period_b`.
pub fn delta_matrix(
    events: &[CyicEvent],
    segmentation: &PhaseSegmentation,
    period_a: &str,
    period_b: &str,
    map: &ClusterMap,
    exclude: &[&str],
) -> Result<DeltaMatrix, ReportError> {
    let pa = segmentation
        .period(period_a)
        .ok_or_else(|| ReportError::UnknownPeriod(period_a.to_string()))?;
    let pb = segmentation
        .period(period_b)
        .ok_or_else(|| ReportError::UnknownPeriod(period_b.to_string()))?;
    let universe = taxonomy::clusters_in_use(map, events)?;
    let clusters = matrix_order(map, universe.into_iter().filter(|c| !exclude.contains(c)));
    let ca = pair_counts(events, pa, map)?;
    let cb = pair_counts(events, pb, map)?;

    let n = clusters.len();
    let mut matrix = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let key = ordered(clusters[i], clusters[j]);
            matrix[i][j] = cb.get(&key).copied().unwrap_or(0) - ca.get(&key).copied().unwrap_or(0);
        }
    }
    let row_totals = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| matrix[i][j]).sum())
        .collect();
    Ok(DeltaMatrix {
        schema_version: SCHEMA_VERSION,
        period_a: pa.label.clone(),
        period_b: pb.label.clone(),
        clusters: clusters.into_iter().map(str::to_string).collect(),
        matrix,
        row_totals,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartnerCount {
    pub cluster: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartnerYear {
    pub year: i32,
    pub partners: Vec<PartnerCount>,
    /// An alphabetical tie-break decided order or membership.
    pub tie: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartnerTimeline {
    pub schema_version: u32,
    pub focal: String,
    pub k: usize,
    pub years: Vec<PartnerYear>,
    /// Window totals for every partner, not only top-k ones.
    pub cumulative: Vec<PartnerCount>,
}

fn sorted_counts(counts: BTreeMap<&str, u64>) -> Vec<PartnerCount> {
    let mut v: Vec<PartnerCount> = counts
        .into_iter()
        .map(|(c, n)| PartnerCount {
            cluster: c.to_string(),
            count: n,
        })
        .collect();
    v.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.cluster.cmp(&b.cluster)));
    v
}

/// Top-`k` partner clusters of `focal`, year by year.
pub fn partner_timeline(
    events: &[CyicEvent],
    focal: &str,
    k: usize,
    map: &ClusterMap,
    window: YearWindow,
) -> Result<PartnerTimeline, ReportError> {
    if map.group_of(focal).is_none() && focal != UNASSIGNED {
        return Err(ReportError::UnknownCluster(focal.to_string()));
    }
    let mut per_year: Vec<BTreeMap<&str, u64>> = vec![BTreeMap::new(); window.len()];
    let mut total: BTreeMap<&str, u64> = BTreeMap::new();
    for e in events {
        let Some(i) = window.index_of(e.year) else {
            continue;
        };
        let (x, y) = map.event_clusters(e)?;
        if x == y {
            continue;
        }
        let partner = if x == focal {
            y
        } else if y == focal {
            x
        } else {
            continue;
        };
        *per_year[i].entry(partner).or_default() += 1;
        *total.entry(partner).or_default() += 1;
    }
    let years = per_year
        .into_iter()
        .enumerate()
        .map(|(i, counts)| {
            let sorted = sorted_counts(counts);
            let horizon = sorted.len().min(k + 1);
            let tie = sorted[..horizon].windows(2).any(|w| w[0].count == w[1].count) && k > 0;
            PartnerYear {
                year: window.year_at(i),
                partners: sorted.into_iter().take(k).collect(),
                tie,
            }
        })
        .collect();
    Ok(PartnerTimeline {
        schema_version: SCHEMA_VERSION,
        focal: focal.to_string(),
        k,
        years,
        cumulative: sorted_counts(total),
    })
}

/// Papers per cluster per window year. A paper counts once per cluster even
/// when several of its subjects fall in it. Strict maps skip unmapped
/// subjects; lenient maps count them under [`UNASSIGNED`].
pub fn cluster_publications(index: &PaperIndex, map: &ClusterMap, window: YearWindow) -> BTreeMap<String, Vec<u64>> {
    let subject_cluster: Vec<Option<&str>> = index.subject_labels().iter().map(|s| map.cluster_of(s).ok()).collect();
    let mut out: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for p in index.papers() {
        let Some(i) = window.index_of(index.year(p)) else {
            continue;
        };
        seen.clear();
        for &s in index.subjects(p) {
            if let Some(c) = subject_cluster[s as usize] {
                seen.insert(c);
            }
        }
        for c in &seen {
            out.entry(c.to_string()).or_insert_with(|| vec![0; window.len()])[i] += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterYear {
    pub year: i32,
    pub intra_events: u64,
    pub cross_events: u64,
    pub publications: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterTimeline {
    pub cluster: String,
    pub group: Option<Group>,
    pub years: Vec<ClusterYear>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairLine {
    pub cluster_a: String,
    pub cluster_b: String,
    pub year: i32,
    pub events: u64,
    pub mean_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineExport {
    pub schema_version: u32,
    pub window: YearWindow,
    pub clusters: Vec<ClusterTimeline>,
    pub pair_lines: Vec<PairLine>,
}

/// Everything a renderer needs to draw the per-cluster event timeline:
/// circle sizes (event counts), colours (publications) and line weights
/// (mean `z` of cross-cluster events per cluster pair and year).
pub fn export_timeline(
    events: &[CyicEvent],
    publications: &BTreeMap<String, Vec<u64>>,
    map: &ClusterMap,
    window: YearWindow,
) -> Result<TimelineExport, ReportError> {
    let mut universe = taxonomy::clusters_in_use(map, events)?;
    universe.extend(publications.keys().map(String::as_str));
    let n = window.len();
    let mut intra: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    let mut cross: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    // ((cluster_a, cluster_b), year) -> (events, z sum)
    type Lines<'a> = BTreeMap<((&'a str, &'a str), i32), (u64, f64)>;
    let mut lines: Lines = BTreeMap::new();
    for e in events {
        let Some(i) = window.index_of(e.year) else {
            continue;
        };
        let (x, y) = map.event_clusters(e)?;
        if x == y {
            intra.entry(x).or_insert_with(|| vec![0; n])[i] += 1;
        } else {
            cross.entry(x).or_insert_with(|| vec![0; n])[i] += 1;
            cross.entry(y).or_insert_with(|| vec![0; n])[i] += 1;
            let slot = lines.entry((ordered(x, y), e.year)).or_insert((0, 0.0));
            slot.0 += 1;
            slot.1 += e.z_value;
        }
    }
    let clusters = universe
        .iter()
        .map(|&c| ClusterTimeline {
            cluster: c.to_string(),
            group: map.group_of(c),
            years: (0..n)
                .map(|i| ClusterYear {
                    year: window.year_at(i),
                    intra_events: intra.get(c).map_or(0, |v| v[i]),
                    cross_events: cross.get(c).map_or(0, |v| v[i]),
                    publications: publications.get(c).map_or(0, |v| v[i]),
                })
                .collect(),
        })
        .collect();
    let mut pair_lines: Vec<PairLine> = lines
        .into_iter()
        .map(|(((a, b), year), (count, zsum))| PairLine {
            cluster_a: a.to_string(),
            cluster_b: b.to_string(),
            year,
            events: count,
            mean_z: zsum / count as f64,
        })
        .collect();
    pair_lines.sort_by(|p, q| {
        p.year
            .cmp(&q.year)
            .then_with(|| p.cluster_a.cmp(&q.cluster_a))
            .then_with(|| p.cluster_b.cmp(&q.cluster_b))
    });
    Ok(TimelineExport {
        schema_version: SCHEMA_VERSION,
        window,
        clusters,
        pair_lines,
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
}
