//! Subject → discipline-cluster assignments and event classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, IngestError, IngestMode};
use crate::detect::CyicEvent;
use crate::rounding;

pub const CLUSTER_MAP_HEADER: &str = "subject\tcluster\tgroup";

/// Cluster that collects unmapped subjects in lenient mode.
pub const UNASSIGNED: &str = "Unassigned";

/// Starter map: one row per cluster, named after the cluster itself. Real
/// deployments replace the subject column with their own vocabulary.
pub const STARTER_MAP: &str = include_str!("../data/clusters_starter.tsv");

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Open(#[from] IngestError),
    #[error("expected header {expected:?}, found {found:?}")]
    Header { expected: &'static str, found: String },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate subject {subject:?}")]
    DuplicateSubject { line: usize, subject: String },
    #[error("line {line}: unknown group tag {tag:?} (natural|humsoc)")]
    UnknownGroup { line: usize, tag: String },
    #[error("line {line}: cluster {cluster:?} already tagged {previous}")]
    ConflictingGroup {
        line: usize,
        cluster: String,
        previous: Group,
    },
    #[error("cluster map has no rows")]
    Empty,
    #[error("subject {0:?} has no cluster assignment")]
    Unassigned(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "natural")]
    Natural,
    #[serde(rename = "humsoc")]
    HumanitiesSocial,
}

impl Group {
    pub fn tag(&self) -> &'static str {
        match self {
            Group::Natural => "natural",
            Group::HumanitiesSocial => "humsoc",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Group {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "natural" => Ok(Group::Natural),
            "humsoc" => Ok(Group::HumanitiesSocial),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterMap {
    assignments: BTreeMap<String, String>,
    groups: BTreeMap<String, Group>,
    mode: IngestMode,
}

impl ClusterMap {
    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        let reader = corpus::open_text(path)?;
        Self::parse(reader).map_err(|e| match e {
            TaxonomyError::Io { source, .. } => TaxonomyError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self, TaxonomyError> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|source| TaxonomyError::Io {
                path: PathBuf::new(),
                source,
            })?,
            None => return Err(TaxonomyError::Empty),
        };
        let header = header.trim_end_matches('\r').trim_start_matches('\u{feff}');
        if header != CLUSTER_MAP_HEADER {
            return Err(TaxonomyError::Header {
                expected: CLUSTER_MAP_HEADER,
                found: header.to_string(),
            });
        }
        let mut map = ClusterMap {
            assignments: BTreeMap::new(),
            groups: BTreeMap::new(),
            mode: IngestMode::Strict,
        };
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(|source| TaxonomyError::Io {
                path: PathBuf::new(),
                source,
            })?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let [subject, cluster, tag] = fields[..] else {
                return Err(TaxonomyError::Malformed {
                    line: line_no,
                    reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            };
            if subject.is_empty() || cluster.is_empty() {
                return Err(TaxonomyError::Malformed {
                    line: line_no,
                    reason: "empty subject or cluster".into(),
                });
            }
            let group: Group = tag.parse().map_err(|_| TaxonomyError::UnknownGroup {
                line: line_no,
                tag: tag.to_string(),
            })?;
            map.insert(line_no, subject, cluster, group)?;
        }
        if map.assignments.is_empty() {
            return Err(TaxonomyError::Empty);
        }
        Ok(map)
    }

    /// Builds a map from `(subject, cluster, group)` triples.
    pub fn from_rows<'a, I>(rows: I) -> Result<Self, TaxonomyError>
    where
        I: IntoIterator<Item = (&'a str, &'a str, Group)>,
    {
        let mut map = ClusterMap {
            assignments: BTreeMap::new(),
            groups: BTreeMap::new(),
            mode: IngestMode::Strict,
        };
        for (i, (s, c, g)) in rows.into_iter().enumerate() {
            map.insert(i + 1, s, c, g)?;
        }
        if map.assignments.is_empty() {
            return Err(TaxonomyError::Empty);
        }
        Ok(map)
    }

    pub fn starter() -> Self {
        Self::parse(STARTER_MAP.as_bytes()).expect("bundled starter map is valid")
    }

    fn insert(&mut self, line: usize, subject: &str, cluster: &str, group: Group) -> Result<(), TaxonomyError> {
        if self.assignments.contains_key(subject) {
            return Err(TaxonomyError::DuplicateSubject {
                line,
                subject: subject.to_string(),
            });
        }
        match self.groups.get(cluster) {
            Some(&previous) if previous != group => {
                return Err(TaxonomyError::ConflictingGroup {
                    line,
                    cluster: cluster.to_string(),
                    previous,
                })
            }
            Some(_) => {}
            None => {
                self.groups.insert(cluster.to_string(), group);
            }
        }
        self.assignments.insert(subject.to_string(), cluster.to_string());
        Ok(())
    }

    /// Lenient maps send unknown subjects to [`UNASSIGNED`].
    pub fn with_mode(mut self, mode: IngestMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> IngestMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn cluster_of(&self, subject: &str) -> Result<&str, TaxonomyError> {
        match self.assignments.get(subject) {
            Some(c) => Ok(c),
            None if self.mode == IngestMode::Lenient => Ok(UNASSIGNED),
            None => Err(TaxonomyError::Unassigned(subject.to_string())),
        }
    }

    /// Group of a cluster; `None` for [`UNASSIGNED`] and unknown names.
    pub fn group_of(&self, cluster: &str) -> Option<Group> {
        self.groups.get(cluster).copied()
    }

    /// Declared clusters, alphabetical.
    pub fn clusters(&self) -> impl Iterator<Item = &str> {
        self.groups.keys().map(String::as_str)
    }

    pub fn cluster_count(&self) -> usize {
        self.groups.len()
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments.iter().map(|(s, c)| (s.as_str(), c.as_str()))
    }

    /// Cluster endpoints of an event, in pair order.
    pub fn event_clusters(&self, event: &CyicEvent) -> Result<(&str, &str), TaxonomyError> {
        Ok((self.cluster_of(event.pair.a())?, self.cluster_of(event.pair.b())?))
    }

    /// Writes the map in its file format, rows sorted by subject.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("{CLUSTER_MAP_HEADER}\n");
        for (s, c) in &self.assignments {
            out.push_str(&format!("{s}\t{c}\t{}\n", self.groups[c]));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub total: u64,
    pub cross_cluster: u64,
    pub intra_cluster: u64,
    /// Cross-cluster share, e.g. `"92.06%"`; `None` without events.
    pub cross_share: Option<String>,
}

impl ClassificationSummary {
    pub fn from_counts(cross: u64, intra: u64) -> Self {
        let total = cross + intra;
        ClassificationSummary {
            total,
            cross_cluster: cross,
            intra_cluster: intra,
            cross_share: rounding::format_percentage(cross, total).ok(),
        }
    }
}

/// Fills `cross_cluster` on every event and reports the class counts.
pub fn classify_events(events: &mut [CyicEvent], map: &ClusterMap) -> Result<ClassificationSummary, TaxonomyError> {
    let (mut cross, mut intra) = (0u64, 0u64);
    for e in events.iter_mut() {
        let (x, y) = map.event_clusters(e)?;
        let is_cross = x != y;
        e.cross_cluster = Some(is_cross);
        if is_cross {
            cross += 1;
        } else {
            intra += 1;
        }
    }
    Ok(ClassificationSummary::from_counts(cross, intra))
}

/// Every cluster touched by `events`, including [`UNASSIGNED`] when a lenient
/// map needed it, alphabetical.
pub fn clusters_in_use<'m>(map: &'m ClusterMap, events: &[CyicEvent]) -> Result<BTreeSet<&'m str>, TaxonomyError> {
    let mut set: BTreeSet<&str> = map.clusters().collect();
    for e in events {
        let (x, y) = map.event_clusters(e)?;
        set.insert(x);
        set.insert(y);
    }
    Ok(set)
}
