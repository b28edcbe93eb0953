//! Folding resolved citation edges into yearly flows per subject pair.
//!
//! Every edge `P → Q` whose citing paper `P` was published in a window year
//! `t` contributes to the directed flow `x → y` at `t` for each ordered label
//! pair `x ∈ subjects(P)`, `y ∈ subjects(Q)` with `x ≠ y`. The unordered pair
//! `{a, b}` (with `a < b`) then stores `ir = a → b` and `ic = b → a`.
//!
//! Counting is done into [`CountShard`]s that merge by element-wise addition,
//! so any partition of the edge stream aggregates to the same table.

use std::cmp::Ordering;
use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, EdgeSummary, IngestError, IngestMode, PaperIndex, ResolvedEdge};
use crate::window::YearWindow;

const SHARD_CHUNK: usize = 8192;
const SUBJECT_BITS: u32 = 24;
const YEAR_BITS: u32 = 16;

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("a subject pair needs two distinct subjects, got {0:?} twice")]
    SameSubject(String),
    #[error("too many subjects ({0}) for the pair key layout")]
    TooManySubjects(usize),
    #[error("window of {0} years is too long")]
    WindowTooLong(usize),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountingMode {
    /// Each ordered label pair of an edge counts 1.
    #[default]
    Full,
    /// Each ordered label pair counts `1 / (|subjects(P)| · |subjects(Q)|)`.
    Fractional,
}

impl std::str::FromStr for CountingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(CountingMode::Full),
            "fractional" => Ok(CountingMode::Fractional),
            other => Err(format!("unknown counting mode {other:?} (full|fractional)")),
        }
    }
}

/// Unordered pair of distinct subjects, stored with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubjectPair {
    a: String,
    b: String,
}

impl SubjectPair {
    pub fn new(x: impl Into<String>, y: impl Into<String>) -> Result<Self, AggregateError> {
        let (x, y) = (x.into(), y.into());
        match x.cmp(&y) {
            Ordering::Less => Ok(SubjectPair { a: x, b: y }),
            Ordering::Greater => Ok(SubjectPair { a: y, b: x }),
            Ordering::Equal => Err(AggregateError::SameSubject(x)),
        }
    }

    pub fn a(&self) -> &str {
        &self.a
    }

    pub fn b(&self) -> &str {
        &self.b
    }

    pub fn contains(&self, subject: &str) -> bool {
        self.a == subject || self.b == subject
    }
}

impl fmt::Display for SubjectPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.a, self.b)
    }
}

/// Dense yearly flows of one pair. Index `i` is year `window.start() + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSeries {
    pub pair: SubjectPair,
    pub window: YearWindow,
    /// Flow `a → b` per year.
    pub ir: Vec<f64>,
    /// Flow `b → a` per year.
    pub ic: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTotals {
    pub total_ir: f64,
    pub total_ic: f64,
    /// Years with flow in both directions, i.e. years where `z` can be positive.
    pub z_support: usize,
}

impl PairSeries {
    pub fn zeros(pair: SubjectPair, window: YearWindow) -> Self {
        PairSeries {
            pair,
            window,
            ir: vec![0.0; window.len()],
            ic: vec![0.0; window.len()],
        }
    }

    /// Builds a series from per-year flows given in `(x → y, y → x)`
    /// orientation, swapping into canonical orientation when `x > y`.
    pub fn from_directed(
        x: &str,
        y: &str,
        window: YearWindow,
        x_to_y: Vec<f64>,
        y_to_x: Vec<f64>,
    ) -> Result<Self, AggregateError> {
        assert_eq!(x_to_y.len(), window.len());
        assert_eq!(y_to_x.len(), window.len());
        let pair = SubjectPair::new(x, y)?;
        let (ir, ic) = if pair.a() == x {
            (x_to_y, y_to_x)
        } else {
            (y_to_x, x_to_y)
        };
        Ok(PairSeries { pair, window, ir, ic })
    }

    pub fn is_all_zero(&self) -> bool {
        self.ir.iter().chain(&self.ic).all(|&v| v == 0.0)
    }

    pub fn totals(&self) -> PairTotals {
        pair_totals(self)
    }
}

/// Window sums of a series.
pub fn pair_totals(series: &PairSeries) -> PairTotals {
    PairTotals {
        total_ir: series.ir.iter().sum(),
        total_ic: series.ic.iter().sum(),
        z_support: series
            .ir
            .iter()
            .zip(&series.ic)
            .filter(|(&r, &c)| r > 0.0 && c > 0.0)
            .count(),
    }
}

/// The surviving pairs of an aggregation, sorted by pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    pub window: YearWindow,
    pub counting: CountingMode,
    pub series: Vec<PairSeries>,
    /// Resolved edges per citing-paper year.
    pub annual_citations: Vec<u64>,
}

impl PairTable {
    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn get(&self, pair: &SubjectPair) -> Option<&PairSeries> {
        self.series
            .binary_search_by(|s| s.pair.cmp(pair))
            .ok()
            .map(|i| &self.series[i])
    }

    /// Tab-separated `a b year ir ic` rows for every non-zero pair-year.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "a\tb\tyear\tir\tic")?;
        for s in &self.series {
            for (i, (&r, &c)) in s.ir.iter().zip(&s.ic).enumerate() {
                if r == 0.0 && c == 0.0 {
                    continue;
                }
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    s.pair.a(),
                    s.pair.b(),
                    s.window.year_at(i),
                    format_count(r),
                    format_count(c)
                )?;
            }
        }
        Ok(())
    }
}

/// Integral counts print as integers, fractional ones with six decimals.
pub fn format_count(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6}")
    }
}

fn cell_key(lo: u32, hi: u32, year_index: usize) -> u64 {
    ((lo as u64) << (SUBJECT_BITS + YEAR_BITS)) | ((hi as u64) << YEAR_BITS) | year_index as u64
}

fn split_key(key: u64) -> (u32, u32, usize) {
    let mask = (1u64 << SUBJECT_BITS) - 1;
    (
        (key >> (SUBJECT_BITS + YEAR_BITS)) as u32,
        ((key >> YEAR_BITS) & mask) as u32,
        (key & ((1 << YEAR_BITS) - 1)) as usize,
    )
}

/// Partial counts over some subset of the edges.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountShard {
    cells: FxHashMap<u64, [f64; 2]>,
    annual: Vec<u64>,
}

impl CountShard {
    fn add_edge(&mut self, index: &PaperIndex, window: YearWindow, mode: CountingMode, e: &ResolvedEdge) {
        let Some(t) = window.index_of(index.year(e.citing)) else {
            return;
        };
        if self.annual.is_empty() {
            self.annual = vec![0; window.len()];
        }
        self.annual[t] += 1;
        let from = index.subjects(e.citing);
        let to = index.subjects(e.cited);
        let weight = match mode {
            CountingMode::Full => 1.0,
            CountingMode::Fractional => 1.0 / (from.len() * to.len()) as f64,
        };
        for &x in from {
            for &y in to {
                match x.cmp(&y) {
                    Ordering::Less => self.cells.entry(cell_key(x, y, t)).or_default()[0] += weight,
                    Ordering::Greater => self.cells.entry(cell_key(y, x, t)).or_default()[1] += weight,
                    Ordering::Equal => {}
                }
            }
        }
    }

    /// Element-wise addition.
    pub fn merge(&mut self, other: CountShard) {
        if self.annual.is_empty() {
            self.annual = other.annual;
        } else {
            for (a, b) in self.annual.iter_mut().zip(other.annual) {
                *a += b;
            }
        }
        if self.cells.is_empty() {
            self.cells = other.cells;
            return;
        }
        for (k, [r, c]) in other.cells {
            let cell = self.cells.entry(k).or_default();
            cell[0] += r;
            cell[1] += c;
        }
    }
}

/// Accumulates edges into pair counts.
pub struct Aggregator<'a> {
    index: &'a PaperIndex,
    window: YearWindow,
    mode: CountingMode,
    counts: CountShard,
}

impl<'a> Aggregator<'a> {
    pub fn new(index: &'a PaperIndex, window: YearWindow, mode: CountingMode) -> Result<Self, AggregateError> {
        if index.subject_count() >= 1 << SUBJECT_BITS {
            return Err(AggregateError::TooManySubjects(index.subject_count()));
        }
        if window.len() >= 1 << YEAR_BITS {
            return Err(AggregateError::WindowTooLong(window.len()));
        }
        Ok(Aggregator {
            index,
            window,
            mode,
            counts: CountShard::default(),
        })
    }

    /// Counts one shard of edges without touching the accumulator.
    pub fn count(&self, edges: &[ResolvedEdge]) -> CountShard {
        let mut shard = CountShard::default();
        for e in edges {
            shard.add_edge(self.index, self.window, self.mode, e);
        }
        shard
    }

    /// Counts `edges` in fixed-size chunks on the rayon pool and merges them
    /// in chunk order.
    pub fn add_edges(&mut self, edges: &[ResolvedEdge]) {
        let shards: Vec<CountShard> = edges.par_chunks(SHARD_CHUNK).map(|chunk| self.count(chunk)).collect();
        for shard in shards {
            self.counts.merge(shard);
        }
    }

    pub fn merge_shard(&mut self, shard: CountShard) {
        self.counts.merge(shard);
    }

    pub fn finish(self) -> PairTable {
        let n = self.window.len();
        let mut by_pair: FxHashMap<(u32, u32), (Vec<f64>, Vec<f64>)> = FxHashMap::default();
        for (key, [r, c]) in self.counts.cells {
            if r == 0.0 && c == 0.0 {
                continue;
            }
            let (lo, hi, t) = split_key(key);
            let entry = by_pair.entry((lo, hi)).or_insert_with(|| (vec![0.0; n], vec![0.0; n]));
            entry.0[t] = r;
            entry.1[t] = c;
        }
        let mut keys: Vec<(u32, u32)> = by_pair.keys().copied().collect();
        // Subject ids ascend with labels, so id order is pair order.
        keys.sort_unstable();
        let series = keys
            .into_iter()
            .map(|k| {
                let (ir, ic) = by_pair.remove(&k).expect("key present");
                PairSeries {
                    pair: SubjectPair {
                        a: self.index.subject_label(k.0).to_string(),
                        b: self.index.subject_label(k.1).to_string(),
                    },
                    window: self.window,
                    ir,
                    ic,
                }
            })
            .collect();
        let mut annual_citations = self.counts.annual;
        if annual_citations.is_empty() {
            annual_citations = vec![0; n];
        }
        PairTable {
            window: self.window,
            counting: self.mode,
            series,
            annual_citations,
        }
    }
}

/// Aggregates in-memory edges.
pub fn aggregate(
    index: &PaperIndex,
    edges: &[ResolvedEdge],
    window: YearWindow,
    mode: CountingMode,
) -> Result<PairTable, AggregateError> {
    let mut agg = Aggregator::new(index, window, mode)?;
    agg.add_edges(edges);
    Ok(agg.finish())
}

/// Streams a citations file straight into the aggregator; edges are never
/// held in memory beyond one batch.
pub fn aggregate_file(
    citations: &Path,
    index: &PaperIndex,
    window: YearWindow,
    counting: CountingMode,
    ingest: IngestMode,
) -> Result<(PairTable, EdgeSummary), AggregateError> {
    let mut agg = Aggregator::new(index, window, counting)?;
    let summary = corpus::ingest_citations(citations, index, ingest, |batch| agg.add_edges(batch))?;
    Ok((agg.finish(), summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CitationEdge, PaperRecord};

    fn paper(id: &str, year: i32, subjects: &[&str]) -> PaperRecord {
        PaperRecord {
            paper_id: id.into(),
            year,
            subjects: subjects.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn run(papers: Vec<PaperRecord>, edges: &[(&str, &str)], window: YearWindow, mode: CountingMode) -> PairTable {
        let index = PaperIndex::from_records(papers).unwrap();
        let rows: Vec<CitationEdge> = edges
            .iter()
            .map(|(a, b)| CitationEdge {
                citing_id: a.to_string(),
                cited_id: b.to_string(),
            })
            .collect();
        let (resolved, _) = corpus::resolve_citations(&index, &rows);
        aggregate(&index, &resolved, window, mode).unwrap()
    }

    fn w(a: i32, b: i32) -> YearWindow {
        YearWindow::new(a, b).unwrap()
    }

    #[test]
    fn single_edge() {
        let t = run(
            vec![paper("P", 2000, &["A"]), paper("Q", 1990, &["B"])],
            &[("P", "Q")],
            w(1999, 2001),
            CountingMode::Full,
        );
        assert_eq!(t.len(), 1);
        let s = &t.series[0];
        assert_eq!((s.pair.a(), s.pair.b()), ("A", "B"));
        assert_eq!(s.ir, [0.0, 1.0, 0.0]);
        assert_eq!(s.ic, [0.0, 0.0, 0.0]);
        assert_eq!(t.annual_citations, [0, 1, 0]);
    }

    #[test]
    fn reverse_orientation_lands_in_ic() {
        let t = run(
            vec![paper("P", 2000, &["B"]), paper("Q", 2000, &["A"])],
            &[("P", "Q")],
            w(2000, 2000),
            CountingMode::Full,
        );
        assert_eq!(t.series[0].ir, [0.0]);
        assert_eq!(t.series[0].ic, [1.0]);
    }

    #[test]
    fn multi_subject_full_counting_excludes_self_pairs() {
        let t = run(
            vec![paper("P", 2000, &["A", "B"]), paper("Q", 2000, &["A", "B"])],
            &[("P", "Q")],
            w(2000, 2000),
            CountingMode::Full,
        );
        assert_eq!(t.len(), 1);
        assert_eq!(t.series[0].ir, [1.0]);
        assert_eq!(t.series[0].ic, [1.0]);
    }

    #[test]
    fn fractional_counting_divides_by_label_product() {
        let t = run(
            vec![paper("P", 2000, &["A", "B"]), paper("Q", 2000, &["A", "B"])],
            &[("P", "Q")],
            w(2000, 2000),
            CountingMode::Fractional,
        );
        assert_eq!(t.series[0].ir, [0.25]);
        assert_eq!(t.series[0].ic, [0.25]);
    }

    #[test]
    fn out_of_window_citing_papers_do_not_count() {
        let t = run(
            vec![
                paper("P", 1970, &["A"]),
                paper("Q", 2000, &["B"]),
                paper("R", 2000, &["A"]),
            ],
            &[("P", "Q"), ("R", "P")],
            w(1981, 2020),
            CountingMode::Full,
        );
        // R (2000, A) cites P (1970, A): same label, excluded. P is out of window.
        assert!(t.is_empty());
        assert_eq!(t.annual_citations.iter().sum::<u64>(), 1);
    }

    #[test]
    fn pair_totals_arithmetic() {
        let mut s = PairSeries::zeros(SubjectPair::new("A", "B").unwrap(), w(1, 2));
        assert_eq!(
            s.totals(),
            PairTotals {
                total_ir: 0.0,
                total_ic: 0.0,
                z_support: 0
            }
        );
        s.ir = vec![1.0, 2.0];
        s.ic = vec![3.0, 4.0];
        assert_eq!(
            s.totals(),
            PairTotals {
                total_ir: 3.0,
                total_ic: 7.0,
                z_support: 2
            }
        );
    }

    #[test]
    fn subject_pair_is_canonical() {
        let p = SubjectPair::new("b", "a").unwrap();
        assert_eq!((p.a(), p.b()), ("a", "b"));
        assert!(SubjectPair::new("x", "x").is_err());
        // Case-sensitive: "B" < "a" in byte order.
        let p = SubjectPair::new("a", "B").unwrap();
        assert_eq!(p.a(), "B");
    }

    #[test]
    fn from_directed_swaps_orientation() {
        let s = PairSeries::from_directed("b", "a", w(1, 2), vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
        assert_eq!(s.pair.a(), "a");
        assert_eq!(s.ir, [3.0, 4.0]);
        assert_eq!(s.ic, [1.0, 2.0]);
    }

    #[test]
    fn dump_is_sorted_and_sparse() {
        let t = run(
            vec![
                paper("P", 2000, &["B"]),
                paper("Q", 2001, &["A"]),
                paper("R", 2001, &["C"]),
            ],
            &[("P", "Q"), ("Q", "R"), ("R", "P")],
            w(2000, 2002),
            CountingMode::Full,
        );
        let mut buf = Vec::new();
        t.write_dump(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "a\tb\tyear\tir\tic\nA\tB\t2000\t0\t1\nA\tC\t2001\t1\t0\nB\tC\t2001\t0\t1\n"
        );
    }

    #[test]
    fn count_formatting() {
        assert_eq!(format_count(3.0), "3");
        assert_eq!(format_count(0.25), "0.250000");
    }
}
