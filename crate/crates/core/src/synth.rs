//! Deterministic synthetic corpora with planted critical years.
//!
//! A [`Scenario`] declares subjects, per-ordered-pair yearly citation rates
//! and planted surges. [`generate`] realizes the rates as papers and edges in
//! the ingest file formats and reports a [`Manifest`] of what it wrote.
//! In deterministic mode every rate is rounded to an exact count, which makes
//! the ground truth computable by [`expected_detections`].

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CITATIONS_HEADER, PAPERS_HEADER};
use crate::detect::DetectionParams;
use crate::taxonomy::{ClusterMap, Group, CLUSTER_MAP_HEADER};
use crate::window::YearWindow;
use crate::SCHEMA_VERSION;

pub mod oracle;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible scenario: {0}")]
    Infeasible(String),
    #[error("ground truth needs deterministic mode without multi-subject papers")]
    NotDeterministic,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("scenario file: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthMode {
    /// Counts are the rates rounded half away from zero.
    #[default]
    Deterministic,
    /// Counts are Poisson draws with the rates as means.
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalanceMode {
    /// Both directions jump to `surge_factor · max(rate_ab, rate_ba)`
    /// (or `surge_factor` when both rates are zero).
    #[default]
    Equalize,
    /// Both directions are multiplied by `surge_factor`.
    Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSpec {
    pub label: String,
    pub cluster: String,
    pub group: Group,
}

/// Expected yearly citations from papers of `from` to papers of `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSpec {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub rate: f64,
    /// Per-year rates over the whole window; overrides `rate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yearly: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEvent {
    pub a: String,
    pub b: String,
    pub year: i32,
    pub surge_factor: f64,
    #[serde(default)]
    pub balance_mode: BalanceMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub window: YearWindow,
    #[serde(default)]
    pub mode: SynthMode,
    pub subjects: Vec<SubjectSpec>,
    #[serde(default)]
    pub baseline_rates: Vec<RateSpec>,
    #[serde(default)]
    pub planted_events: Vec<PlantedEvent>,
    /// Share of citing papers that carry a second, random subject.
    #[serde(default)]
    pub multi_subject_fraction: f64,
}

/// Rate matrix keyed by `(from, to)` subject indices.
pub type RateSchedule = BTreeMap<(usize, usize), Vec<f64>>;

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, SynthError> {
        let text = std::fs::read_to_string(path).map_err(|source| SynthError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    fn subject_index(&self, label: &str) -> Result<usize, SynthError> {
        self.subjects
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| SynthError::Infeasible(format!("unknown subject {label:?}")))
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Infeasible(m));
        if self.subjects.is_empty() {
            return bad("no subjects".into());
        }
        let mut labels: Vec<&str> = self.subjects.iter().map(|s| s.label.as_str()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("duplicate subject {:?}", w[0]));
        }
        for s in &self.subjects {
            if s.label.trim() != s.label || s.label.is_empty() || s.label.contains(['\t', ';', '\n']) {
                return bad(format!("subject label {:?} is not representable", s.label));
            }
        }
        let cluster_map = self.cluster_map_rows();
        ClusterMap::from_rows(cluster_map.iter().map(|(s, c, g)| (s.as_str(), c.as_str(), *g)))
            .map_err(|e| SynthError::Infeasible(e.to_string()))?;
        for r in &self.baseline_rates {
            let (from, to) = (self.subject_index(&r.from)?, self.subject_index(&r.to)?);
            if from == to {
                return bad(format!("rate from {:?} to itself", r.from));
            }
            let ok = |v: f64| v.is_finite() && v >= 0.0;
            if !ok(r.rate) {
                return bad(format!("rate {} for {} → {}", r.rate, r.from, r.to));
            }
            if let Some(y) = &r.yearly {
                if y.len() != self.window.len() {
                    return bad(format!(
                        "yearly rates for {} → {} have {} entries, window has {}",
                        r.from,
                        r.to,
                        y.len(),
                        self.window.len()
                    ));
                }
                if !y.iter().all(|&v| ok(v)) {
                    return bad(format!("negative or non-finite yearly rate for {} → {}", r.from, r.to));
                }
            }
        }
        for p in &self.planted_events {
            let (a, b) = (self.subject_index(&p.a)?, self.subject_index(&p.b)?);
            if a == b {
                return bad(format!("planted event on {:?} with itself", p.a));
            }
            if !(p.surge_factor > 1.0 && p.surge_factor.is_finite()) {
                return bad(format!("surge factor {} must exceed 1", p.surge_factor));
            }
            if !self.window.contains(p.year) {
                return bad(format!("planted year {} outside {}", p.year, self.window));
            }
        }
        if !(0.0..=1.0).contains(&self.multi_subject_fraction) {
            return bad(format!(
                "multi_subject_fraction {} outside [0, 1]",
                self.multi_subject_fraction
            ));
        }
        if self.multi_subject_fraction > 0.0 && self.subjects.len() < 2 {
            return bad("multi-subject papers need at least two subjects".into());
        }
        Ok(())
    }

    fn cluster_map_rows(&self) -> Vec<(String, String, Group)> {
        self.subjects
            .iter()
            .map(|s| (s.label.clone(), s.cluster.clone(), s.group))
            .collect()
    }

    pub fn cluster_map(&self) -> Result<ClusterMap, SynthError> {
        let rows = self.cluster_map_rows();
        ClusterMap::from_rows(rows.iter().map(|(s, c, g)| (s.as_str(), c.as_str(), *g)))
            .map_err(|e| SynthError::Infeasible(e.to_string()))
    }

    /// Expected yearly rate for every ordered pair with a declared rate or a
    /// planted event, surges applied.
    pub fn rate_schedule(&self) -> Result<RateSchedule, SynthError> {
        self.validate()?;
        let n = self.window.len();
        let mut rates: RateSchedule = BTreeMap::new();
        for r in &self.baseline_rates {
            let key = (self.subject_index(&r.from)?, self.subject_index(&r.to)?);
            let values = r.yearly.clone().unwrap_or_else(|| vec![r.rate; n]);
            rates.insert(key, values);
        }
        for p in &self.planted_events {
            let (a, b) = (self.subject_index(&p.a)?, self.subject_index(&p.b)?);
            let start = self.window.index_of(p.year).expect("validated");
            let mut ab = rates.remove(&(a, b)).unwrap_or_else(|| vec![0.0; n]);
            let mut ba = rates.remove(&(b, a)).unwrap_or_else(|| vec![0.0; n]);
            for t in start..n {
                match p.balance_mode {
                    BalanceMode::Scale => {
                        ab[t] *= p.surge_factor;
                        ba[t] *= p.surge_factor;
                    }
                    BalanceMode::Equalize => {
                        let base = ab[t].max(ba[t]);
                        let level = if base > 0.0 {
                            base * p.surge_factor
                        } else {
                            p.surge_factor
                        };
                        ab[t] = level;
                        ba[t] = level;
                    }
                }
            }
            rates.insert((a, b), ab);
            rates.insert((b, a), ba);
        }
        Ok(rates)
    }

    /// Realized directed counts (before multi-subject labels are added).
    pub fn count_schedule(&self) -> Result<BTreeMap<(usize, usize), Vec<u64>>, SynthError> {
        let rates = self.rate_schedule()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = BTreeMap::new();
        for (key, values) in rates {
            let counts = values
                .iter()
                .map(|&r| match self.mode {
                    SynthMode::Deterministic => r.round() as u64,
                    SynthMode::Stochastic if r > 0.0 => Poisson::new(r).expect("positive rate").sample(&mut rng) as u64,
                    SynthMode::Stochastic => 0,
                })
                .collect();
            out.insert(key, counts);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedCount {
    pub from: String,
    pub to: String,
    pub year: i32,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestPairTotal {
    pub a: String,
    pub b: String,
    pub total_ir: u64,
    pub total_ic: u64,
}

/// What a generation run wrote. Counts follow full counting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub seed: u64,
    pub mode: SynthMode,
    pub window: YearWindow,
    pub paper_count: u64,
    pub edge_count: u64,
    pub subject_count: u64,
    pub cluster_count: u64,
    /// Edges per citing year, window years only.
    pub annual_citations: Vec<u64>,
    /// Non-zero directed subject flows, sorted by `(from, to, year)`.
    pub directed_counts: Vec<DirectedCount>,
    pub pair_totals: Vec<ManifestPairTotal>,
    pub planted_events: Vec<PlantedEvent>,
}

impl Manifest {
    /// Directed counts as `(from, to) → per-year vector`.
    pub fn directed_series(&self) -> BTreeMap<(String, String), Vec<u64>> {
        let mut out: BTreeMap<(String, String), Vec<u64>> = BTreeMap::new();
        for d in &self.directed_counts {
            let i = self.window.index_of(d.year).expect("manifest years in window");
            out.entry((d.from.clone(), d.to.clone()))
                .or_insert_with(|| vec![0; self.window.len()])[i] = d.count;
        }
        out
    }
}

fn target_id(subject: usize) -> String {
    format!("t{subject:05}")
}

fn citing_id(subject: usize, year: i32, i: u64) -> String {
    format!("c{subject:05}-{year}-{i}")
}

/// Writes the papers, citations and cluster-map files to the given sinks.
pub fn generate_into<P: Write, C: Write, K: Write>(
    scenario: &Scenario,
    mut papers: P,
    mut citations: C,
    mut clusters: K,
) -> Result<Manifest, SynthError> {
    let counts = scenario.count_schedule()?;
    let window = scenario.window;
    let n = window.len();
    let ns = scenario.subjects.len();
    let label = |s: usize| scenario.subjects[s].label.as_str();
    let io = |source| SynthError::Io {
        path: "<generator output>".into(),
        source,
    };

    // A second RNG stream for extra labels keeps count draws independent of
    // the multi-subject fraction.
    let mut label_rng = ChaCha8Rng::seed_from_u64(scenario.seed ^ 0x9e37_79b9_7f4a_7c15);

    writeln!(papers, "{PAPERS_HEADER}").map_err(io)?;
    writeln!(citations, "{CITATIONS_HEADER}").map_err(io)?;
    let mut paper_count = 0u64;
    let mut edge_count = 0u64;
    for s in 0..ns {
        writeln!(papers, "{}\t{}\t{}", target_id(s), window.start(), label(s)).map_err(io)?;
        paper_count += 1;
    }

    // Outgoing counts grouped by citing subject.
    let mut outgoing: Vec<Vec<(usize, &Vec<u64>)>> = vec![Vec::new(); ns];
    for (&(from, to), v) in &counts {
        outgoing[from].push((to, v));
    }

    let mut directed: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
    let mut annual = vec![0u64; n];
    for (x, targets) in outgoing.iter().enumerate() {
        for t in 0..n {
            let year = window.year_at(t);
            let papers_needed = targets.iter().map(|(_, v)| v[t]).max().unwrap_or(0);
            for i in 0..papers_needed {
                let mut subjects = vec![x];
                if scenario.multi_subject_fraction > 0.0 && label_rng.random::<f64>() < scenario.multi_subject_fraction
                {
                    let mut extra = label_rng.random_range(0..ns - 1);
                    if extra >= x {
                        extra += 1;
                    }
                    subjects.push(extra);
                }
                let joined: Vec<&str> = subjects.iter().map(|&s| label(s)).collect();
                let id = citing_id(x, year, i);
                writeln!(papers, "{id}\t{year}\t{}", joined.join(";")).map_err(io)?;
                paper_count += 1;
                for &(y, v) in targets {
                    if v[t] <= i {
                        continue;
                    }
                    writeln!(citations, "{id}\t{}", target_id(y)).map_err(io)?;
                    edge_count += 1;
                    annual[t] += 1;
                    for &s in &subjects {
                        if s != y {
                            *directed.entry((s, y, t)).or_default() += 1;
                        }
                    }
                }
            }
        }
    }

    let map = scenario.cluster_map()?;
    clusters.write_all(map.to_tsv().as_bytes()).map_err(io)?;
    debug_assert!(map.to_tsv().starts_with(CLUSTER_MAP_HEADER));

    let mut directed_counts: Vec<DirectedCount> = directed
        .iter()
        .map(|(&(from, to, t), &count)| DirectedCount {
            from: label(from).to_string(),
            to: label(to).to_string(),
            year: window.year_at(t),
            count,
        })
        .collect();
    directed_counts.sort_by(|p, q| (&p.from, &p.to, p.year).cmp(&(&q.from, &q.to, q.year)));

    let mut totals: BTreeMap<(String, String), (u64, u64)> = BTreeMap::new();
    for d in &directed_counts {
        if d.from < d.to {
            totals.entry((d.from.clone(), d.to.clone())).or_default().0 += d.count;
        } else {
            totals.entry((d.to.clone(), d.from.clone())).or_default().1 += d.count;
        }
    }

    Ok(Manifest {
        schema_version: SCHEMA_VERSION,
        seed: scenario.seed,
        mode: scenario.mode,
        window,
        paper_count,
        edge_count,
        subject_count: ns as u64,
        cluster_count: map.cluster_count() as u64,
        annual_citations: annual,
        directed_counts,
        pair_totals: totals
            .into_iter()
            .map(|((a, b), (ir, ic))| ManifestPairTotal {
                a,
                b,
                total_ir: ir,
                total_ic: ic,
            })
            .collect(),
        planted_events: scenario.planted_events.clone(),
    })
}

/// Generated files held in memory.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub papers: String,
    pub citations: String,
    pub clusters: String,
    pub manifest: Manifest,
}

pub fn generate(scenario: &Scenario) -> Result<SyntheticCorpus, SynthError> {
    let (mut p, mut c, mut k) = (Vec::new(), Vec::new(), Vec::new());
    let manifest = generate_into(scenario, &mut p, &mut c, &mut k)?;
    let utf8 = |v: Vec<u8>| String::from_utf8(v).expect("generator writes UTF-8");
    Ok(SyntheticCorpus {
        papers: utf8(p),
        citations: utf8(c),
        clusters: utf8(k),
        manifest,
    })
}

pub const PAPERS_FILE: &str = "papers.tsv";
pub const CITATIONS_FILE: &str = "citations.tsv";
pub const CLUSTERS_FILE: &str = "clusters.tsv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `papers.tsv`, `citations.tsv`, `clusters.tsv` and `manifest.json`
/// into `dir`, streaming the large files.
pub fn generate_to_dir(scenario: &Scenario, dir: &Path) -> Result<Manifest, SynthError> {
    let create = |name: &str| {
        let path = dir.join(name);
        File::create(&path)
            .map(|f| BufWriter::with_capacity(1 << 20, f))
            .map_err(|source| SynthError::Io {
                path: path.display().to_string(),
                source,
            })
    };
    std::fs::create_dir_all(dir).map_err(|source| SynthError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let (mut p, mut c, mut k) = (create(PAPERS_FILE)?, create(CITATIONS_FILE)?, create(CLUSTERS_FILE)?);
    let manifest = generate_into(scenario, &mut p, &mut c, &mut k)?;
    let flush_err = |source| SynthError::Io {
        path: dir.display().to_string(),
        source,
    };
    p.flush().map_err(flush_err)?;
    c.flush().map_err(flush_err)?;
    k.flush().map_err(flush_err)?;
    let mut m = create(MANIFEST_FILE)?;
    serde_json::to_writer_pretty(&mut m, &manifest)?;
    m.write_all(b"\n").map_err(flush_err)?;
    m.flush().map_err(flush_err)?;
    Ok(manifest)
}

/// Ground-truth events for a deterministic scenario, from the naive oracle
/// run directly on the exact count schedule.
pub fn expected_detections(
    scenario: &Scenario,
    params: &DetectionParams,
) -> Result<Vec<oracle::OracleEvent>, SynthError> {
    if scenario.mode != SynthMode::Deterministic || scenario.multi_subject_fraction > 0.0 {
        return Err(SynthError::NotDeterministic);
    }
    let counts = scenario.count_schedule()?;
    let named: BTreeMap<(String, String), Vec<u64>> = counts
        .into_iter()
        .map(|((f, t), v)| {
            (
                (scenario.subjects[f].label.clone(), scenario.subjects[t].label.clone()),
                v,
            )
        })
        .collect();
    Ok(oracle::naive_detect(scenario.window, &named, params))
}

/// The 21 bundled cluster names with `n` subjects spread round-robin over
/// them, labelled `"<cluster> <k>"`.
pub fn spread_subjects(n: usize) -> Vec<SubjectSpec> {
    let starter = ClusterMap::starter();
    let clusters: Vec<(String, Group)> = starter
        .clusters()
        .map(|c| (c.to_string(), starter.group_of(c).expect("declared")))
        .collect();
    (0..n)
        .map(|i| {
            let (cluster, group) = &clusters[i % clusters.len()];
            SubjectSpec {
                label: format!("{cluster} {:03}", i / clusters.len() + 1),
                cluster: cluster.clone(),
                group: *group,
            }
        })
        .collect()
}

/// Every ordered pair of `subjects` cites at `rate` per year.
pub fn uniform_rates(subjects: &[SubjectSpec], rate: f64) -> Vec<RateSpec> {
    let mut out = Vec::with_capacity(subjects.len() * subjects.len().saturating_sub(1));
    for x in subjects {
        for y in subjects {
            if x.label != y.label {
                out.push(RateSpec {
                    from: x.label.clone(),
                    to: y.label.clone(),
                    rate,
                    yearly: None,
                });
            }
        }
    }
    out
}

/// The smallest end-to-end fixture: one pair whose `z` runs
/// `[0, 0, 0, 0, 12, 13]`, with a single critical year at the fifth year.
pub fn six_year_fixture() -> Scenario {
    let subject = |label: &str, cluster: &str| SubjectSpec {
        label: label.into(),
        cluster: cluster.into(),
        group: Group::Natural,
    };
    Scenario {
        seed: 0,
        window: YearWindow::new(2000, 2005).expect("valid"),
        mode: SynthMode::Deterministic,
        subjects: vec![subject("A", "X"), subject("B", "Y")],
        baseline_rates: vec![
            RateSpec {
                from: "A".into(),
                to: "B".into(),
                rate: 0.0,
                yearly: Some(vec![1.0, 0.0, 1.0, 0.0, 12.0, 13.0]),
            },
            RateSpec {
                from: "B".into(),
                to: "A".into(),
                rate: 0.0,
                yearly: Some(vec![0.0, 0.0, 0.0, 0.0, 12.0, 13.0]),
            },
        ],
        planted_events: Vec::new(),
        multi_subject_fraction: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_subjects() -> Vec<SubjectSpec> {
        vec![
            SubjectSpec {
                label: "A".into(),
                cluster: "X".into(),
                group: Group::Natural,
            },
            SubjectSpec {
                label: "B".into(),
                cluster: "Y".into(),
                group: Group::HumanitiesSocial,
            },
        ]
    }

    #[test]
    fn zero_rates_give_papers_only() {
        let s = Scenario {
            seed: 1,
            window: YearWindow::new(2000, 2004).unwrap(),
            mode: SynthMode::Stochastic,
            subjects: two_subjects(),
            baseline_rates: uniform_rates(&two_subjects(), 0.0),
            planted_events: vec![],
            multi_subject_fraction: 0.0,
        };
        let c = generate(&s).unwrap();
        assert_eq!(c.manifest.edge_count, 0);
        assert_eq!(c.manifest.paper_count, 2);
        assert_eq!(c.citations, "citing_id\tcited_id\n");
    }

    #[test]
    fn equalized_surge_schedule() {
        let s = Scenario {
            seed: 1,
            window: YearWindow::new(2000, 2005).unwrap(),
            mode: SynthMode::Deterministic,
            subjects: two_subjects(),
            baseline_rates: vec![RateSpec {
                from: "A".into(),
                to: "B".into(),
                rate: 0.5,
                yearly: None,
            }],
            planted_events: vec![PlantedEvent {
                a: "A".into(),
                b: "B".into(),
                year: 2004,
                surge_factor: 24.0,
                balance_mode: BalanceMode::Equalize,
            }],
            multi_subject_fraction: 0.0,
        };
        let rates = s.rate_schedule().unwrap();
        assert_eq!(rates[&(0, 1)], [0.5, 0.5, 0.5, 0.5, 12.0, 12.0]);
        assert_eq!(rates[&(1, 0)], [0.0, 0.0, 0.0, 0.0, 12.0, 12.0]);
        // 0.5 rounds half away from zero.
        let counts = s.count_schedule().unwrap();
        assert_eq!(counts[&(0, 1)], [1, 1, 1, 1, 12, 12]);
    }

    #[test]
    fn scale_mode_multiplies_both_directions() {
        let mut s = six_year_fixture();
        s.planted_events.push(PlantedEvent {
            a: "B".into(),
            b: "A".into(),
            year: 2005,
            surge_factor: 2.0,
            balance_mode: BalanceMode::Scale,
        });
        let rates = s.rate_schedule().unwrap();
        assert_eq!(rates[&(0, 1)][5], 26.0);
        assert_eq!(rates[&(1, 0)][4], 12.0);
    }

    #[test]
    fn infeasible_scenarios() {
        let mut s = six_year_fixture();
        s.subjects.clear();
        assert!(matches!(s.validate(), Err(SynthError::Infeasible(_))));
        let mut s = six_year_fixture();
        s.planted_events.push(PlantedEvent {
            a: "A".into(),
            b: "B".into(),
            year: 1999,
            surge_factor: 3.0,
            balance_mode: BalanceMode::Equalize,
        });
        assert!(s.validate().is_err());
        let mut s = six_year_fixture();
        s.baseline_rates[0].yearly = Some(vec![1.0]);
        assert!(s.validate().is_err());
        assert!(Scenario::from_json(r#"{"seed":1,"window":{"start":5,"end":1},"subjects":[]}"#).is_err());
    }

    #[test]
    fn same_seed_same_bytes() {
        let mut s = six_year_fixture();
        s.mode = SynthMode::Stochastic;
        s.multi_subject_fraction = 0.5;
        let a = generate(&s).unwrap();
        let b = generate(&s).unwrap();
        assert_eq!(a.papers, b.papers);
        assert_eq!(a.citations, b.citations);
        assert_eq!(a.manifest, b.manifest);
    }

    #[test]
    fn six_year_fixture_ground_truth() {
        let truth = expected_detections(&six_year_fixture(), &DetectionParams::default()).unwrap();
        assert_eq!(truth.len(), 1);
        assert_eq!(
            (truth[0].a.as_str(), truth[0].b.as_str(), truth[0].year),
            ("A", "B", 2004)
        );
    }

    #[test]
    fn stochastic_refuses_ground_truth() {
        let mut s = six_year_fixture();
        s.mode = SynthMode::Stochastic;
        assert!(matches!(
            expected_detections(&s, &DetectionParams::default()),
            Err(SynthError::NotDeterministic)
        ));
    }

    #[test]
    fn spread_over_bundled_clusters() {
        let subjects = spread_subjects(254);
        let s = Scenario {
            seed: 0,
            window: YearWindow::new(2000, 2000).unwrap(),
            mode: SynthMode::Deterministic,
            subjects,
            baseline_rates: vec![],
            planted_events: vec![],
            multi_subject_fraction: 0.0,
        };
        let map = s.cluster_map().unwrap();
        assert_eq!(map.len(), 254);
        assert_eq!(map.cluster_count(), 21);
    }
}
