//! Streaming ingestion of the papers and citations files.
//!
//! Both inputs are tab-separated with a fixed header row and may be gzip
//! compressed (selected by a `.gz` extension). Papers are loaded into a
//! [`PaperIndex`] that interns subject labels; citation rows are resolved
//! against that index batch by batch and handed to a sink, so memory grows
//! with the number of papers and never with the number of edges.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PAPERS_HEADER: &str = "paper_id\tyear\tsubjects";
pub const CITATIONS_HEADER: &str = "citing_id\tcited_id";

/// Lines resolved per parallel work unit. Fixed so results never depend on
/// the size of the thread pool.
const EDGE_CHUNK: usize = 8192;
const EDGE_BATCH: usize = EDGE_CHUNK * 32;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: expected header {expected:?}, found {found:?}")]
    Header {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate paper_id {id:?}")]
    DuplicatePaper { line: usize, id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IngestMode {
    /// Abort on the first malformed row.
    Strict,
    /// Count and skip malformed rows.
    #[default]
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaperRecord {
    pub paper_id: String,
    pub year: i32,
    pub subjects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationEdge {
    pub citing_id: String,
    pub cited_id: String,
}

/// Dense handle of a paper inside a [`PaperIndex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PaperRef(pub u32);

/// A citation edge whose endpoints both resolved to indexed papers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedEdge {
    pub citing: PaperRef,
    pub cited: PaperRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub paper_count: u64,
    pub edge_count: u64,
    pub skipped_edges: u64,
    pub subject_count: u64,
    pub year_range: Option<(i32, i32)>,
    /// Paper rows dropped in lenient mode.
    pub skipped_papers: u64,
}

impl CorpusStats {
    pub fn new(index: &PaperIndex, edges: &EdgeSummary) -> Self {
        CorpusStats {
            paper_count: index.len() as u64,
            edge_count: edges.edge_count,
            skipped_edges: edges.skipped(),
            subject_count: index.subject_count() as u64,
            year_range: index.year_range(),
            skipped_papers: index.skipped_rows(),
        }
    }
}

/// Outcome counters of a citations pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSummary {
    pub edge_count: u64,
    pub unresolved: u64,
    pub self_loops: u64,
    pub malformed: u64,
}

impl EdgeSummary {
    pub fn skipped(&self) -> u64 {
        self.unresolved + self.self_loops + self.malformed
    }
}

/// Opens a text input, transparently decompressing `*.gz`.
pub fn open_text(path: &Path) -> Result<Box<dyn BufRead + Send>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let gz = path.extension().is_some_and(|ext| ext == "gz");
    Ok(if gz {
        Box::new(BufReader::with_capacity(
            1 << 20,
            MultiGzDecoder::new(BufReader::new(file)),
        ))
    } else {
        Box::new(BufReader::with_capacity(1 << 20, file))
    })
}

fn strip_eol(line: &mut String) {
    while line.ends_with('\n') || line.ends_with('\r') {
        line.pop();
    }
}

fn read_header(reader: &mut dyn BufRead, path: &Path, expected: &'static str) -> Result<(), IngestError> {
    let mut header = String::new();
    reader.read_line(&mut header).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    strip_eol(&mut header);
    let header = header.trim_start_matches('\u{feff}');
    if header != expected {
        return Err(IngestError::Header {
            path: path.to_path_buf(),
            expected,
            found: header.to_string(),
        });
    }
    Ok(())
}

/// Parses one data row of the papers file.
pub fn parse_paper_row(line: &str) -> Result<PaperRecord, String> {
    let mut fields = line.split('\t');
    let (Some(id), Some(year), Some(subjects), None) = (fields.next(), fields.next(), fields.next(), fields.next())
    else {
        return Err(format!(
            "expected 3 tab-separated fields, found {}",
            line.split('\t').count()
        ));
    };
    let id = id.trim();
    if id.is_empty() {
        return Err("empty paper_id".into());
    }
    let year: i32 = year
        .trim()
        .parse()
        .map_err(|_| format!("invalid year {:?}", year.trim()))?;
    if subjects.trim().is_empty() {
        return Err("empty subjects field".into());
    }
    let mut seen = BTreeSet::new();
    let mut labels = Vec::new();
    for label in subjects.split(';').map(str::trim) {
        if label.is_empty() {
            return Err("empty subject label".into());
        }
        if !seen.insert(label) {
            return Err(format!("duplicate subject label {label:?}"));
        }
        labels.push(label.to_string());
    }
    Ok(PaperRecord {
        paper_id: id.to_string(),
        year,
        subjects: labels,
    })
}

fn parse_edge_row(line: &str) -> Result<(&str, &str), String> {
    let mut fields = line.split('\t');
    match (fields.next(), fields.next(), fields.next()) {
        (Some(a), Some(b), None) => {
            let (a, b) = (a.trim(), b.trim());
            if a.is_empty() || b.is_empty() {
                Err("empty paper id in citation row".into())
            } else {
                Ok((a, b))
            }
        }
        _ => Err(format!(
            "expected 2 tab-separated fields, found {}",
            line.split('\t').count()
        )),
    }
}

/// Iterator over the data rows of a papers file, yielding each record with
/// its 1-based line number.
pub struct PaperRows {
    reader: Box<dyn BufRead + Send>,
    path: PathBuf,
    line_no: usize,
    buf: String,
}

impl PaperRows {
    pub fn open(path: &Path) -> Result<Self, IngestError> {
        let mut reader = open_text(path)?;
        read_header(&mut reader, path, PAPERS_HEADER)?;
        Ok(PaperRows {
            reader,
            path: path.to_path_buf(),
            line_no: 1,
            buf: String::new(),
        })
    }
}

impl Iterator for PaperRows {
    type Item = Result<(usize, PaperRecord), IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(source) => {
                    return Some(Err(IngestError::Io {
                        path: self.path.clone(),
                        source,
                    }))
                }
            }
            self.line_no += 1;
            strip_eol(&mut self.buf);
            if self.buf.trim().is_empty() {
                continue;
            }
            let line = self.line_no;
            return Some(
                parse_paper_row(&self.buf)
                    .map(|r| (line, r))
                    .map_err(|reason| IngestError::Malformed { line, reason }),
            );
        }
    }
}

/// Read-only index of every ingested paper, keyed by `paper_id`.
///
/// Subject labels are interned so that subject ids ascend in label order:
/// comparing two ids compares the labels.
#[derive(Debug, Clone, Default)]
pub struct PaperIndex {
    ids: FxHashMap<Box<str>, u32>,
    paper_ids: Vec<Box<str>>,
    years: Vec<i32>,
    offsets: Vec<u32>,
    subject_ids: Vec<u32>,
    labels: Vec<String>,
    skipped_rows: u64,
}

impl PaperIndex {
    /// Loads a papers file. Duplicate ids abort in either mode.
    pub fn from_path(path: &Path, mode: IngestMode) -> Result<Self, IngestError> {
        let mut builder = PaperIndexBuilder::default();
        for row in PaperRows::open(path)? {
            match row {
                Ok((line, record)) => builder.push(record, line)?,
                Err(IngestError::Malformed { .. }) if mode == IngestMode::Lenient => builder.skip_row(),
                Err(e) => return Err(e),
            }
        }
        Ok(builder.finish())
    }

    /// Builds an index from records already in memory. Records are numbered
    /// from 1 for error reporting.
    pub fn from_records<I>(records: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = PaperRecord>,
    {
        let mut builder = PaperIndexBuilder::default();
        for (i, record) in records.into_iter().enumerate() {
            builder.push(record, i + 1)?;
        }
        Ok(builder.finish())
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn skipped_rows(&self) -> u64 {
        self.skipped_rows
    }

    pub fn resolve(&self, paper_id: &str) -> Option<PaperRef> {
        self.ids.get(paper_id).map(|&i| PaperRef(i))
    }

    pub fn year(&self, paper: PaperRef) -> i32 {
        self.years[paper.0 as usize]
    }

    pub fn paper_id(&self, paper: PaperRef) -> &str {
        &self.paper_ids[paper.0 as usize]
    }

    /// Subject ids of a paper, ascending.
    pub fn subjects(&self, paper: PaperRef) -> &[u32] {
        let i = paper.0 as usize;
        &self.subject_ids[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn subject_label(&self, subject: u32) -> &str {
        &self.labels[subject as usize]
    }

    /// All subject labels, sorted.
    pub fn subject_labels(&self) -> &[String] {
        &self.labels
    }

    pub fn subject_count(&self) -> usize {
        self.labels.len()
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        let min = self.years.iter().copied().min()?;
        let max = self.years.iter().copied().max()?;
        Some((min, max))
    }

    pub fn papers(&self) -> impl Iterator<Item = PaperRef> + '_ {
        (0..self.years.len() as u32).map(PaperRef)
    }

    pub fn record(&self, paper: PaperRef) -> PaperRecord {
        PaperRecord {
            paper_id: self.paper_id(paper).to_string(),
            year: self.year(paper),
            subjects: self
                .subjects(paper)
                .iter()
                .map(|&s| self.subject_label(s).to_string())
                .collect(),
        }
    }

    pub fn edge(&self, edge: &ResolvedEdge) -> CitationEdge {
        CitationEdge {
            citing_id: self.paper_id(edge.citing).to_string(),
            cited_id: self.paper_id(edge.cited).to_string(),
        }
    }

    /// Resolves a single citation row. `Err` carries the skip reason.
    pub fn resolve_edge(&self, citing_id: &str, cited_id: &str) -> Result<ResolvedEdge, EdgeSkip> {
        if citing_id == cited_id {
            return Err(EdgeSkip::SelfLoop);
        }
        match (self.resolve(citing_id), self.resolve(cited_id)) {
            (Some(citing), Some(cited)) => Ok(ResolvedEdge { citing, cited }),
            _ => Err(EdgeSkip::Unresolved),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSkip {
    SelfLoop,
    Unresolved,
}

#[derive(Default)]
struct PaperIndexBuilder {
    ids: FxHashMap<Box<str>, u32>,
    paper_ids: Vec<Box<str>>,
    years: Vec<i32>,
    offsets: Vec<u32>,
    subject_ids: Vec<u32>,
    label_ids: FxHashMap<String, u32>,
    labels: Vec<String>,
    skipped_rows: u64,
}

impl PaperIndexBuilder {
    fn push(&mut self, record: PaperRecord, line: usize) -> Result<(), IngestError> {
        if self.ids.contains_key(record.paper_id.as_str()) {
            return Err(IngestError::DuplicatePaper {
                line,
                id: record.paper_id,
            });
        }
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        let id: Box<str> = record.paper_id.into_boxed_str();
        self.ids.insert(id.clone(), self.years.len() as u32);
        self.paper_ids.push(id);
        self.years.push(record.year);
        for label in record.subjects {
            let next = self.labels.len() as u32;
            let sid = *self.label_ids.entry(label).or_insert_with_key(|l| {
                self.labels.push(l.clone());
                next
            });
            self.subject_ids.push(sid);
        }
        self.offsets.push(self.subject_ids.len() as u32);
        Ok(())
    }

    fn skip_row(&mut self) {
        self.skipped_rows += 1;
    }

    fn finish(mut self) -> PaperIndex {
        // Re-number subjects so id order equals label order.
        let mut order: Vec<u32> = (0..self.labels.len() as u32).collect();
        order.sort_by(|&a, &b| self.labels[a as usize].cmp(&self.labels[b as usize]));
        let mut remap = vec![0u32; order.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old as usize] = new as u32;
        }
        for s in &mut self.subject_ids {
            *s = remap[*s as usize];
        }
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        for w in 0..self.years.len() {
            let (a, b) = (self.offsets[w] as usize, self.offsets[w + 1] as usize);
            self.subject_ids[a..b].sort_unstable();
        }
        let labels = order
            .iter()
            .map(|&old| std::mem::take(&mut self.labels[old as usize]))
            .collect();
        PaperIndex {
            ids: self.ids,
            paper_ids: self.paper_ids,
            years: self.years,
            offsets: self.offsets,
            subject_ids: self.subject_ids,
            labels,
            skipped_rows: self.skipped_rows,
        }
    }
}

enum RowOutcome {
    Edge(ResolvedEdge),
    Skip(EdgeSkip),
    Malformed(String),
}

/// Streams a citations file, resolving rows against `index` and passing each
/// batch of resolved edges to `sink` in file order.
///
/// Unresolved endpoints and self-loops are always skipped and counted.
/// Malformed rows abort in strict mode and are counted in lenient mode.
pub fn ingest_citations<F>(
    path: &Path,
    index: &PaperIndex,
    mode: IngestMode,
    mut sink: F,
) -> Result<EdgeSummary, IngestError>
where
    F: FnMut(&[ResolvedEdge]),
{
    let mut reader = open_text(path)?;
    read_header(&mut reader, path, CITATIONS_HEADER)?;
    let io_err = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };

    let mut summary = EdgeSummary::default();
    let mut text = String::new();
    let mut spans: Vec<(usize, usize)> = Vec::with_capacity(EDGE_BATCH);
    let mut first_line = 2usize;
    let mut edges = Vec::with_capacity(EDGE_BATCH);
    loop {
        text.clear();
        spans.clear();
        let mut eof = false;
        while spans.len() < EDGE_BATCH {
            let start = text.len();
            if reader.read_line(&mut text).map_err(io_err)? == 0 {
                eof = true;
                break;
            }
            let mut end = text.len();
            let bytes = text.as_bytes();
            while end > start && (bytes[end - 1] == b'\n' || bytes[end - 1] == b'\r') {
                end -= 1;
            }
            spans.push((start, end));
        }

        let outcomes: Vec<Vec<(usize, RowOutcome)>> = spans
            .par_chunks(EDGE_CHUNK)
            .enumerate()
            .map(|(chunk, rows)| {
                rows.iter()
                    .enumerate()
                    .filter_map(|(i, &(a, b))| {
                        let line = &text[a..b];
                        if line.trim().is_empty() {
                            return None;
                        }
                        let offset = chunk * EDGE_CHUNK + i;
                        let outcome = match parse_edge_row(line) {
                            Err(reason) => RowOutcome::Malformed(reason),
                            Ok((citing, cited)) => match index.resolve_edge(citing, cited) {
                                Ok(e) => RowOutcome::Edge(e),
                                Err(skip) => RowOutcome::Skip(skip),
                            },
                        };
                        Some((offset, outcome))
                    })
                    .collect()
            })
            .collect();

        edges.clear();
        for (offset, outcome) in outcomes.into_iter().flatten() {
            match outcome {
                RowOutcome::Edge(e) => {
                    summary.edge_count += 1;
                    edges.push(e);
                }
                RowOutcome::Skip(EdgeSkip::SelfLoop) => summary.self_loops += 1,
                RowOutcome::Skip(EdgeSkip::Unresolved) => summary.unresolved += 1,
                RowOutcome::Malformed(reason) => match mode {
                    IngestMode::Strict => {
                        return Err(IngestError::Malformed {
                            line: first_line + offset,
                            reason,
                        })
                    }
                    IngestMode::Lenient => summary.malformed += 1,
                },
            }
        }
        if !edges.is_empty() {
            sink(&edges);
        }
        first_line += spans.len();
        if eof {
            break;
        }
    }
    Ok(summary)
}

/// Resolves in-memory citation rows the same way [`ingest_citations`] does.
pub fn resolve_citations<'a, I>(index: &PaperIndex, rows: I) -> (Vec<ResolvedEdge>, EdgeSummary)
where
    I: IntoIterator<Item = &'a CitationEdge>,
{
    let mut summary = EdgeSummary::default();
    let mut edges = Vec::new();
    for row in rows {
        match index.resolve_edge(&row.citing_id, &row.cited_id) {
            Ok(e) => {
                summary.edge_count += 1;
                edges.push(e);
            }
            Err(EdgeSkip::SelfLoop) => summary.self_loops += 1,
            Err(EdgeSkip::Unresolved) => summary.unresolved += 1,
        }
    }
    (edges, summary)
}
