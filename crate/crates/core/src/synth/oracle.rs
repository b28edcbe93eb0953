//! Brute-force reference for the three detection conditions.
//!
//! Works directly on directed per-year counts keyed by subject labels and
//! shares no code with the streaming pipeline: it re-derives pairs, the
//! balance × volume statistic, a fully sorted median and two-pass moments
//! with plain loops.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::detect::{DetectionParams, MedianScope, SigmaKind};
use crate::window::YearWindow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEvent {
    pub a: String,
    pub b: String,
    pub year: i32,
    pub z_value: f64,
    pub slope: f64,
    pub pair_mean: f64,
    pub pair_sigma: f64,
    pub global_median: f64,
}

/// `directed[(from, to)][t]` is the number of citations from `from`-papers
/// to `to`-papers in window year `t`.
#[allow(clippy::needless_range_loop)]
pub fn naive_detect(
    window: YearWindow,
    directed: &BTreeMap<(String, String), Vec<u64>>,
    params: &DetectionParams,
) -> Vec<OracleEvent> {
    let n = window.len();

    // Unordered pairs with (lo → hi, hi → lo) flows.
    let mut pairs: BTreeMap<(String, String), (Vec<u64>, Vec<u64>)> = BTreeMap::new();
    for ((from, to), counts) in directed {
        if from == to {
            continue;
        }
        let forward = from < to;
        let key = if forward {
            (from.clone(), to.clone())
        } else {
            (to.clone(), from.clone())
        };
        let entry = pairs.entry(key).or_insert_with(|| (vec![0; n], vec![0; n]));
        for t in 0..n {
            if forward {
                entry.0[t] += counts[t];
            } else {
                entry.1[t] += counts[t];
            }
        }
    }
    pairs.retain(|_, (r, c)| r.iter().chain(c.iter()).any(|&v| v > 0));

    let mut z_by_pair: Vec<((String, String), Vec<f64>)> = Vec::new();
    for (key, (r, c)) in &pairs {
        let mut z = vec![0.0; n];
        for t in 0..n {
            let (ir, ic) = (r[t] as f64, c[t] as f64);
            let hi = if ir > ic { ir } else { ic };
            if hi > 0.0 {
                let balance = 1.0 - (ir - ic).abs() / hi;
                let flow = ir / 2.0 + ic / 2.0;
                z[t] = balance * flow;
            }
        }
        z_by_pair.push((key.clone(), z));
    }
    if z_by_pair.is_empty() {
        return Vec::new();
    }

    let mean_of = |z: &[f64]| {
        let mut s = 0.0;
        for v in z {
            s += v;
        }
        s / z.len() as f64
    };

    let mut pool: Vec<f64> = Vec::new();
    for (_, z) in &z_by_pair {
        match params.median_scope {
            MedianScope::AllPairYearValues => pool.extend_from_slice(z),
            MedianScope::PairMeans => pool.push(mean_of(z)),
        }
    }
    pool.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let m = pool.len();
    let median = if m % 2 == 1 {
        pool[m / 2]
    } else {
        (pool[m / 2 - 1] + pool[m / 2]) / 2.0
    };

    let mut events = Vec::new();
    for ((a, b), z) in &z_by_pair {
        let mean = mean_of(z);
        let mut ss = 0.0;
        for v in z {
            ss += (v - mean) * (v - mean);
        }
        let dof = match params.sigma_kind {
            SigmaKind::Population => n as f64,
            SigmaKind::Sample => (n as f64 - 1.0).max(0.0),
        };
        let sigma = if dof > 0.0 { (ss / dof).sqrt() } else { 0.0 };
        for t in 1..n {
            let slope = z[t] - z[t - 1];
            let c1 = mean > median;
            let c2 = slope > params.sigma_multiplier * sigma;
            let c3 = z[t] > mean;
            if c1 && c2 && c3 {
                events.push(OracleEvent {
                    a: a.clone(),
                    b: b.clone(),
                    year: window.year_at(t),
                    z_value: z[t],
                    slope,
                    pair_mean: mean,
                    pair_sigma: sigma,
                    global_median: median,
                });
            }
        }
    }
    events.sort_by(|p, q| (p.year, &p.a, &p.b).cmp(&(q.year, &q.a, &q.b)));
    events
}
