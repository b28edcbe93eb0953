#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use cyic_core::aggregate::PairTable;
use cyic_core::corpus::{self, CitationEdge, PaperIndex, PaperRecord, ResolvedEdge};
use cyic_core::detect::{CyicEvent, DetectionParams, MedianScope, SigmaKind};
use cyic_core::pipeline::{self, DetectionRun, PipelineConfig};
use cyic_core::synth::{
    self, oracle::OracleEvent, BalanceMode, Manifest, PlantedEvent, RateSpec, Scenario, SubjectSpec, SynthMode,
};
use cyic_core::{Group, YearWindow};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn window(start: i32, end: i32) -> YearWindow {
    YearWindow::new(start, end).unwrap()
}

pub fn subject(label: &str, cluster: &str, group: Group) -> SubjectSpec {
    SubjectSpec {
        label: label.into(),
        cluster: cluster.into(),
        group,
    }
}

pub fn rate(from: &str, to: &str, r: f64) -> RateSpec {
    RateSpec {
        from: from.into(),
        to: to.into(),
        rate: r,
        yearly: None,
    }
}

pub fn yearly(from: &str, to: &str, v: &[f64]) -> RateSpec {
    RateSpec {
        from: from.into(),
        to: to.into(),
        rate: 0.0,
        yearly: Some(v.to_vec()),
    }
}

pub fn plant(a: &str, b: &str, year: i32, surge: f64, mode: BalanceMode) -> PlantedEvent {
    PlantedEvent {
        a: a.into(),
        b: b.into(),
        year,
        surge_factor: surge,
        balance_mode: mode,
    }
}

pub fn scenario(
    w: YearWindow,
    subjects: Vec<SubjectSpec>,
    rates: Vec<RateSpec>,
    plants: Vec<PlantedEvent>,
) -> Scenario {
    Scenario {
        seed: 0,
        window: w,
        mode: SynthMode::Deterministic,
        subjects,
        baseline_rates: rates,
        planted_events: plants,
        multi_subject_fraction: 0.0,
    }
}

/// Generates `sc` into `dir` and runs the file-based pipeline on it.
pub fn run_scenario(sc: &Scenario, params: DetectionParams, dir: &Path) -> (DetectionRun, Manifest) {
    let manifest = synth::generate_to_dir(sc, dir).expect("generate");
    let mut config = PipelineConfig::new(sc.window);
    config.params = params;
    let run = pipeline::run_detection(&dir.join(synth::PAPERS_FILE), &dir.join(synth::CITATIONS_FILE), &config)
        .expect("pipeline");
    (run, manifest)
}

pub type EventKey = (String, String, i32, f64, f64, f64, f64, f64);

pub fn event_key(e: &CyicEvent) -> EventKey {
    (
        e.pair.a().to_string(),
        e.pair.b().to_string(),
        e.year,
        e.z_value,
        e.slope,
        e.pair_mean,
        e.pair_sigma,
        e.global_median,
    )
}

pub fn oracle_key(e: &OracleEvent) -> EventKey {
    (
        e.a.clone(),
        e.b.clone(),
        e.year,
        e.z_value,
        e.slope,
        e.pair_mean,
        e.pair_sigma,
        e.global_median,
    )
}

/// Deterministic scenarios checked against the oracle, with the parameters
/// to run them under.
pub fn oracle_scenarios() -> Vec<(&'static str, Scenario, DetectionParams)> {
    use BalanceMode::{Equalize, Scale};
    let n = Group::Natural;
    let h = Group::HumanitiesSocial;
    let d = DetectionParams::default();
    let mut out = Vec::new();

    out.push(("six-year fixture", synth::six_year_fixture(), d));

    let subjects = synth::spread_subjects(8);
    let rates = synth::uniform_rates(&subjects, 1.0);
    out.push((
        "flat mutual citation",
        scenario(window(2000, 2009), subjects, rates, vec![]),
        d,
    ));

    let subjects = synth::spread_subjects(6);
    let l: Vec<String> = subjects.iter().map(|s| s.label.clone()).collect();
    let rates = synth::uniform_rates(&subjects, 0.6);
    let plants = vec![
        plant(&l[0], &l[1], 2015, 12.0, Equalize),
        plant(&l[2], &l[3], 2012, 15.0, Equalize),
    ];
    out.push((
        "two disjoint plants",
        scenario(window(2000, 2019), subjects, rates, plants),
        d,
    ));

    let subjects = vec![subject("A", "X", n), subject("B", "Y", h), subject("C", "Y", h)];
    let rates = vec![
        rate("A", "B", 2.0),
        rate("B", "A", 1.0),
        rate("A", "C", 1.0),
        rate("C", "A", 1.0),
    ];
    let plants = vec![plant("A", "B", 2008, 10.0, Scale)];
    out.push(("scaled surge", scenario(window(2000, 2009), subjects, rates, plants), d));

    let subjects = vec![subject("A", "X", n), subject("B", "Y", n)];
    let rates = vec![rate("A", "B", 0.5)];
    let plants = vec![plant("A", "B", 2008, 24.0, Equalize)];
    out.push((
        "one-way baseline",
        scenario(window(2000, 2009), subjects, rates, plants),
        d,
    ));

    let subjects = synth::spread_subjects(5);
    let l: Vec<String> = subjects.iter().map(|s| s.label.clone()).collect();
    let rates = synth::uniform_rates(&subjects, 1.0);
    let plants = vec![plant(&l[0], &l[4], 2001, 20.0, Equalize)];
    out.push((
        "surge in second year",
        scenario(window(2000, 2011), subjects, rates, plants),
        d,
    ));

    let subjects = synth::spread_subjects(5);
    let l: Vec<String> = subjects.iter().map(|s| s.label.clone()).collect();
    let rates = synth::uniform_rates(&subjects, 1.0);
    let plants = vec![plant(&l[1], &l[3], 2011, 20.0, Equalize)];
    out.push((
        "surge in last year",
        scenario(window(2000, 2011), subjects, rates, plants),
        d,
    ));

    let subjects = vec![subject("P", "X", n), subject("Q", "Y", h), subject("R", "Z", h)];
    let ramp: Vec<f64> = (0..12).map(|i| i as f64 * 0.75).collect();
    let late: Vec<f64> = (0..12).map(|i| if i >= 9 { 9.0 } else { 0.0 }).collect();
    let rates = vec![
        yearly("P", "Q", &ramp),
        yearly("Q", "P", &ramp),
        yearly("Q", "R", &late),
        yearly("R", "Q", &late),
        rate("P", "R", 3.0),
    ];
    out.push(("yearly ramps", scenario(window(2000, 2011), subjects, rates, vec![]), d));

    out.push(("full window, 42 subjects", wide_scenario(), d));

    let subjects = vec![subject("A", "X", n), subject("B", "Y", n), subject("C", "Z", h)];
    let rates = vec![
        rate("A", "B", 1.0),
        rate("B", "A", 1.0),
        rate("A", "C", 1.0),
        rate("C", "A", 0.0),
    ];
    let plants = vec![
        plant("A", "B", 2010, 12.0, Equalize),
        plant("A", "C", 2013, 18.0, Equalize),
    ];
    out.push((
        "plants sharing a subject",
        scenario(window(2000, 2014), subjects, rates, plants),
        d,
    ));

    let sample = DetectionParams {
        sigma_kind: SigmaKind::Sample,
        median_scope: MedianScope::PairMeans,
        ..d
    };
    out.push(("sample sigma, median of means", wide_scenario(), sample));

    let loose = DetectionParams {
        sigma_multiplier: 1.5,
        ..d
    };
    out.push(("sigma multiplier 1.5", wide_scenario(), loose));
    out
}

/// 42 subjects over the full default window with uneven rates and five plants.
pub fn wide_scenario() -> Scenario {
    use BalanceMode::{Equalize, Scale};
    let subjects = synth::spread_subjects(42);
    let l: Vec<String> = subjects.iter().map(|s| s.label.clone()).collect();
    let mut rates = Vec::new();
    for (i, x) in l.iter().enumerate() {
        for (j, y) in l.iter().enumerate() {
            let r = ((i * 7 + j * 3) % 5) as f64 * 0.5;
            if i != j && r > 0.0 && (i + j) % 3 != 0 {
                rates.push(rate(x, y, r));
            }
        }
    }
    let plants = vec![
        plant(&l[0], &l[1], 2015, 12.0, Equalize),
        plant(&l[2], &l[30], 2010, 10.0, Equalize),
        plant(&l[5], &l[6], 2019, 16.0, Scale),
        plant(&l[8], &l[40], 1995, 20.0, Equalize),
        plant(&l[11], &l[12], 2003, 24.0, Equalize),
    ];
    scenario(window(1981, 2020), subjects, rates, plants)
}

const SUBJECTS: [&str; 8] = ["Alpha", "Beta", "Gamma", "Delta", "Epsilon", "Zeta", "Eta", "Theta"];

/// Sixty papers with one to three of eight subjects and `edges` random
/// citations, some dangling or self-referencing.
pub fn random_corpus(seed: u64, edges: usize) -> (PaperIndex, Vec<ResolvedEdge>, Vec<CitationEdge>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let papers: Vec<PaperRecord> = (0..60)
        .map(|i| {
            let mut subjects: Vec<String> = SUBJECTS.iter().map(|s| s.to_string()).collect();
            subjects.shuffle(&mut rng);
            subjects.truncate(rng.random_range(1..=3));
            PaperRecord {
                paper_id: format!("p{i}"),
                year: rng.random_range(1998..=2011),
                subjects,
            }
        })
        .collect();
    let rows: Vec<CitationEdge> = (0..edges)
        .map(|_| CitationEdge {
            citing_id: format!("p{}", rng.random_range(0..60)),
            cited_id: format!("p{}", rng.random_range(0..62)),
        })
        .collect();
    let index = PaperIndex::from_records(papers).unwrap();
    let (resolved, _) = corpus::resolve_citations(&index, &rows);
    (index, resolved, rows)
}

/// Plain nested-loop recount keyed by labels.
pub fn naive_counts(
    index: &PaperIndex,
    rows: &[CitationEdge],
    w: YearWindow,
) -> BTreeMap<(String, String, i32), (f64, f64)> {
    let mut out: BTreeMap<(String, String, i32), (f64, f64)> = BTreeMap::new();
    for r in rows {
        let (Some(p), Some(q)) = (index.resolve(&r.citing_id), index.resolve(&r.cited_id)) else {
            continue;
        };
        if p == q || !w.contains(index.year(p)) {
            continue;
        }
        let from = index.record(p).subjects;
        let to = index.record(q).subjects;
        for x in &from {
            for y in &to {
                if x < y {
                    out.entry((x.clone(), y.clone(), index.year(p))).or_default().0 += 1.0;
                } else if y < x {
                    out.entry((y.clone(), x.clone(), index.year(p))).or_default().1 += 1.0;
                }
            }
        }
    }
    out
}

pub fn table_counts(t: &PairTable) -> BTreeMap<(String, String, i32), (f64, f64)> {
    let mut out = BTreeMap::new();
    for s in &t.series {
        for (i, year) in s.window.years().enumerate() {
            if s.ir[i] != 0.0 || s.ic[i] != 0.0 {
                out.insert(
                    (s.pair.a().to_string(), s.pair.b().to_string(), year),
                    (s.ir[i], s.ic[i]),
                );
            }
        }
    }
    out
}
