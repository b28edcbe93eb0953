mod common;

use std::collections::BTreeMap;

use common::{naive_counts, random_corpus, table_counts, window};
use cyic_core::aggregate::{self, Aggregator, CountingMode, PairSeries, PairTable, SubjectPair};
use cyic_core::detect::{self, CyicEvent, DetectionParams};
use cyic_core::metrics;
use cyic_core::phase::{self, AnnualActivity, PhaseSegmentation, SegmentationRules};
use cyic_core::report;
use cyic_core::{ClusterMap, Group, YearWindow};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dump(t: &PairTable) -> Vec<u8> {
    let mut v = Vec::new();
    t.write_dump(&mut v).unwrap();
    v
}

#[test]
fn sharded_counts_equal_a_sequential_recount_over_100_seeds() {
    let w = window(2000, 2009);
    for seed in 0..100 {
        let (index, edges, rows) = random_corpus(seed, 1000);
        let table = aggregate::aggregate(&index, &edges, w, CountingMode::Full).unwrap();
        assert_eq!(table_counts(&table), naive_counts(&index, &rows, w), "seed {seed}");

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let mut cuts: Vec<usize> = (0..rng.random_range(1..8))
            .map(|_| rng.random_range(0..=edges.len()))
            .collect();
        cuts.push(0);
        cuts.push(edges.len());
        cuts.sort_unstable();
        let agg = Aggregator::new(&index, w, CountingMode::Full).unwrap();
        let mut shards: Vec<_> = cuts.windows(2).map(|c| agg.count(&edges[c[0]..c[1]])).collect();
        shards.reverse();
        let mut merged = Aggregator::new(&index, w, CountingMode::Full).unwrap();
        for s in shards {
            merged.merge_shard(s);
        }
        assert_eq!(merged.finish(), table, "seed {seed}");
    }
}

#[test]
fn thread_count_is_unobservable() {
    let w = window(2000, 2009);
    let (index, edges, _) = random_corpus(11, 40_000);
    for mode in [CountingMode::Full, CountingMode::Fractional] {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let t = aggregate::aggregate(&index, &edges, w, mode).unwrap();
                let m = cyic_core::pipeline::metric_table(&t);
                let ev = detect::detect(&m, &DetectionParams::default()).unwrap();
                let mut ev_bytes = Vec::new();
                detect::write_events_jsonl(&ev, &mut ev_bytes).unwrap();
                (dump(&t), ev_bytes)
            })
        };
        let one = run(1);
        for n in [2, 3, 8] {
            assert_eq!(run(n), one, "{mode:?} with {n} threads");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_order_does_not_matter(seed in any::<u64>(), shuffle in any::<u64>()) {
        let w = window(2000, 2009);
        let (index, mut edges, _) = random_corpus(seed, 500);
        let before = aggregate::aggregate(&index, &edges, w, CountingMode::Full).unwrap();
        edges.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let after = aggregate::aggregate(&index, &edges, w, CountingMode::Full).unwrap();
        prop_assert_eq!(dump(&before), dump(&after));
    }

    #[test]
    fn fractional_totals_never_exceed_full(seed in any::<u64>()) {
        let w = window(2000, 2009);
        let (index, edges, _) = random_corpus(seed, 300);
        let full = aggregate::aggregate(&index, &edges, w, CountingMode::Full).unwrap();
        let frac = aggregate::aggregate(&index, &edges, w, CountingMode::Fractional).unwrap();
        prop_assert_eq!(full.len(), frac.len());
        for (f, g) in full.series.iter().zip(&frac.series) {
            for i in 0..w.len() {
                prop_assert!(g.ir[i] <= f.ir[i] + 1e-12 && g.ic[i] <= f.ic[i] + 1e-12);
            }
        }
    }

    #[test]
    fn scaling_a_pair_preserves_balance(
        ir in prop::collection::vec(0u32..50, 12),
        ic in prop::collection::vec(0u32..50, 12),
        k in 1u32..=12,
    ) {
        let w = window(2000, 2011);
        let pair = SubjectPair::new("A", "B").unwrap();
        let mk = |m: u32| PairSeries {
            pair: pair.clone(),
            window: w,
            ir: ir.iter().map(|&v| (v * m) as f64).collect(),
            ic: ic.iter().map(|&v| (v * m) as f64).collect(),
        };
        let base = metrics::compute_metric_series(&mk(1));
        let scaled = metrics::compute_metric_series(&mk(k));
        prop_assert_eq!(&base.ib, &scaled.ib);
        for (a, b) in base.kf.iter().zip(&scaled.kf) {
            prop_assert!((b - k as f64 * a).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn scaling_a_pair_preserves_surge_conditions(
        ir in prop::collection::vec(0u32..50, 12),
        ic in prop::collection::vec(0u32..50, 12),
        shift in 1u32..=4,
    ) {
        // Powers of two keep every intermediate exact, so no truth value can
        // flip through rounding.
        let k = 1u32 << shift;
        let w = window(2000, 2011);
        let pair = SubjectPair::new("A", "B").unwrap();
        let params = DetectionParams::default();
        let truth = |m: u32| {
            let s = metrics::compute_metric_series(&PairSeries {
                pair: pair.clone(),
                window: w,
                ir: ir.iter().map(|&v| (v * m) as f64).collect(),
                ic: ic.iter().map(|&v| (v * m) as f64).collect(),
            });
            let (mean, sigma) = detect::pair_stats(&s, &params);
            (1..w.len())
                .map(|i| (s.z[i] - s.z[i - 1] > 2.0 * sigma, s.z[i] > mean))
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(truth(1), truth(k));
    }

    #[test]
    fn turning_points_only_look_backwards(
        counts in prop::collection::vec(0u64..400, 6..30),
        clusters in prop::collection::vec(0u64..21, 30),
        cut in 3usize..30,
    ) {
        let activity: Vec<AnnualActivity> = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| AnnualActivity {
                year: 1990 + i as i32,
                cross_cluster_events: c,
                participating_clusters: clusters[i].min(c * 2),
                total_citations: 0,
            })
            .collect();
        let cut = cut.min(activity.len());
        let rules = SegmentationRules::default();
        let full = phase::detect_turning_points(&activity, &rules).unwrap();
        let prefix = phase::detect_turning_points(&activity[..cut], &rules).unwrap();
        let last = activity[cut - 1].year;
        let early: Vec<_> = full.firings.iter().filter(|f| f.year <= last).copied().collect();
        prop_assert_eq!(early, prefix.firings);
    }
}

#[derive(Debug)]
struct EventWorld {
    map: ClusterMap,
    events: Vec<CyicEvent>,
    segmentation: PhaseSegmentation,
    window: YearWindow,
}

fn event_world() -> impl Strategy<Value = EventWorld> {
    (
        prop::collection::vec(0usize..5, 10),
        prop::collection::vec(any::<bool>(), 5),
        prop::collection::vec((0usize..10, 0usize..10, 0i32..20, 1u32..40), 0..120),
        prop::collection::btree_set(2001i32..2020, 1..4),
    )
        .prop_map(|(assign, natural, raw, tps)| {
            let w = window(2000, 2019);
            let subjects: Vec<String> = (0..10).map(|i| format!("S{i}")).collect();
            let clusters: Vec<String> = (0..5).map(|i| format!("C{i}")).collect();
            let rows: Vec<(&str, &str, Group)> = subjects
                .iter()
                .zip(&assign)
                .map(|(s, &c)| {
                    let g = if natural[c] {
                        Group::Natural
                    } else {
                        Group::HumanitiesSocial
                    };
                    (s.as_str(), clusters[c].as_str(), g)
                })
                .collect();
            let map = ClusterMap::from_rows(rows).unwrap();
            let mut events: Vec<CyicEvent> = raw
                .into_iter()
                .filter(|(x, y, _, _)| x != y)
                .map(|(x, y, t, z)| CyicEvent {
                    pair: SubjectPair::new(subjects[x].clone(), subjects[y].clone()).unwrap(),
                    year: 2000 + t,
                    z_value: z as f64,
                    slope: 1.0,
                    pair_mean: 0.5,
                    pair_sigma: 0.1,
                    global_median: 0.0,
                    cross_cluster: None,
                })
                .collect();
            events.sort_by(|a, b| a.year.cmp(&b.year).then_with(|| a.pair.cmp(&b.pair)));
            events.dedup_by(|a, b| a.year == b.year && a.pair == b.pair);
            let segmentation = PhaseSegmentation::from_turning_points(w, tps.into_iter().collect());
            EventWorld {
                map,
                events,
                segmentation,
                window: w,
            }
        })
}

fn relabel(map: &ClusterMap, f: impl Fn(&str) -> String) -> ClusterMap {
    let rows: Vec<(String, String, Group)> = map
        .assignments()
        .map(|(s, c)| (s.to_string(), f(c), map.group_of(c).unwrap()))
        .collect();
    ClusterMap::from_rows(rows.iter().map(|(s, c, g)| (s.as_str(), c.as_str(), *g))).unwrap()
}

fn cross_between(w: &EventWorld, x: &str, y: &str, period: &phase::Period) -> u64 {
    w.events
        .iter()
        .filter(|e| period.contains(e.year))
        .filter(|e| {
            let (a, b) = w.map.event_clusters(e).unwrap();
            (a == x && b == y) || (a == y && b == x)
        })
        .count() as u64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ranking_counts_are_twice_the_unique_events(w in event_world()) {
        for r in report::rank_clusters(&w.events, &w.segmentation, &w.map).unwrap() {
            let sum: u64 = r.rows.iter().map(|row| row.count).sum();
            prop_assert_eq!(sum, 2 * r.unique_events);
        }
    }

    #[test]
    fn delta_matrix_is_antisymmetric(w in event_world(), i in 0usize..4, j in 0usize..4) {
        let labels: Vec<&str> = w.segmentation.periods.iter().map(|p| p.label.as_str()).collect();
        let (a, b) = (labels[i % labels.len()], labels[j % labels.len()]);
        let ab = report::delta_matrix(&w.events, &w.segmentation, a, b, &w.map, &[]).unwrap();
        let ba = report::delta_matrix(&w.events, &w.segmentation, b, a, &w.map, &[]).unwrap();
        prop_assert_eq!(&ab.clusters, &ba.clusters);
        for (r, s) in ab.matrix.iter().zip(&ba.matrix) {
            for (x, y) in r.iter().zip(s) {
                prop_assert_eq!(*x, -*y);
            }
        }
        for (x, y) in ab.row_totals.iter().zip(&ba.row_totals) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn renaming_clusters_only_renames_rankings(w in event_world()) {
        let renamed = relabel(&w.map, |c| format!("Renamed {c}"));
        let before = report::rank_clusters(&w.events, &w.segmentation, &w.map).unwrap();
        let after = report::rank_clusters(&w.events, &w.segmentation, &renamed).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert_eq!(x.unique_events, y.unique_events);
            let want: BTreeMap<String, u64> =
                x.rows.iter().map(|r| (format!("Renamed {}", r.cluster), r.count)).collect();
            let got: BTreeMap<String, u64> = y.rows.iter().map(|r| (r.cluster.clone(), r.count)).collect();
            prop_assert_eq!(want, got);
        }
    }

    #[test]
    fn merging_two_clusters_absorbs_their_shared_events(w in event_world()) {
        // C0 and C1 may sit in different groups; give the merged cluster C0's.
        let group0 = w.map.group_of("C0");
        let rows: Vec<(String, String, Group)> = w
            .map
            .assignments()
            .map(|(s, c)| {
                if c == "C0" || c == "C1" {
                    (s.to_string(), "Merged".to_string(), group0.or(w.map.group_of(c)).unwrap())
                } else {
                    (s.to_string(), c.to_string(), w.map.group_of(c).unwrap())
                }
            })
            .collect();
        let merged = ClusterMap::from_rows(rows.iter().map(|(s, c, g)| (s.as_str(), c.as_str(), *g))).unwrap();
        let before = report::rank_clusters(&w.events, &w.segmentation, &w.map).unwrap();
        let after = report::rank_clusters(&w.events, &w.segmentation, &merged).unwrap();
        for ((x, y), period) in before.iter().zip(&after).zip(&w.segmentation.periods) {
            let count = |r: &report::ClusterPeriodRanking, c: &str| {
                r.rows.iter().find(|row| row.cluster == c).map_or(0, |row| row.count)
            };
            let shared = cross_between(&w, "C0", "C1", period);
            prop_assert_eq!(y.unique_events, x.unique_events - shared);
            prop_assert_eq!(count(y, "Merged"), count(x, "C0") + count(x, "C1") - 2 * shared);
        }
    }

    #[test]
    fn full_partner_lists_sum_to_focal_events(w in event_world()) {
        let k = w.map.cluster_count();
        for focal in w.map.clusters() {
            let t = report::partner_timeline(&w.events, focal, k, &w.map, w.window).unwrap();
            for py in &t.years {
                let sum: u64 = py.partners.iter().map(|p| p.count).sum();
                let want = w
                    .events
                    .iter()
                    .filter(|e| e.year == py.year)
                    .filter(|e| {
                        let (a, b) = w.map.event_clusters(e).unwrap();
                        a != b && (a == focal || b == focal)
                    })
                    .count() as u64;
                prop_assert_eq!(sum, want);
            }
        }
    }
}
