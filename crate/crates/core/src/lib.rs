//! Detection of critical years for interdisciplinary citations (CYICs).
//!
//! The pipeline streams a subject-labelled publication corpus and its
//! citation edges, folds them into yearly citation counts per unordered
//! subject pair, scores every pair-year with a balance × volume statistic,
//! and flags the years where that statistic surges. Downstream modules map
//! subjects onto discipline clusters, segment the window into development
//! phases and derive ranking, delta-matrix and timeline exports.
//!
//! ```text
//! corpus ──► aggregate ──► metrics ──► detect ──► taxonomy ──► phase ──► report
//! ```

pub mod aggregate;
pub mod corpus;
pub mod detect;
pub mod metrics;
pub mod phase;
pub mod pipeline;
pub mod report;
pub mod rounding;
pub mod synth;
pub mod taxonomy;
mod window;

pub use aggregate::{CountingMode, PairSeries, PairTable, SubjectPair};
pub use corpus::{CorpusStats, IngestMode, PaperIndex, PaperRecord};
pub use detect::{CyicEvent, DetectionParams};
pub use metrics::MetricSeries;
pub use phase::{AnnualActivity, PhaseSegmentation, SegmentationRules};
pub use taxonomy::{ClusterMap, Group};
pub use window::{WindowError, YearWindow};

/// Version stamped into every JSON artifact a pipeline stage writes.
pub const SCHEMA_VERSION: u32 = 1;
