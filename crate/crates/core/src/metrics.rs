//! Balance (IB), volume (KF) and their product `z` per pair-year.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::aggregate::{PairSeries, SubjectPair};
use crate::window::YearWindow;

/// Interdisciplinary balance `1 − |ir − ic| / max(ir, ic)`.
///
/// 1 for perfectly reciprocal flows, 0 for one-way flows. With no flow at
/// all the ratio is undefined; it is taken as 0, which leaves `z` at 0.
pub fn compute_ib(ir: f64, ic: f64) -> f64 {
    let max = ir.max(ic);
    if max <= 0.0 {
        return 0.0;
    }
    1.0 - (ir - ic).abs() / max
}

/// Knowledge flow: the mean of the two directed flows.
pub fn compute_kf(ir: f64, ic: f64) -> f64 {
    ir / 2.0 + ic / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub pair: SubjectPair,
    pub window: YearWindow,
    pub ib: Vec<f64>,
    pub kf: Vec<f64>,
    pub z: Vec<f64>,
}

impl MetricSeries {
    /// Builds a series from `z` alone, with `kf = z` and `ib = 1` wherever
    /// `z > 0`. Used to drive the detector with hand-made statistics.
    pub fn from_z(pair: SubjectPair, window: YearWindow, z: Vec<f64>) -> Self {
        assert_eq!(z.len(), window.len());
        MetricSeries {
            pair,
            window,
            ib: z.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect(),
            kf: z.clone(),
            z,
        }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

pub fn compute_metric_series(series: &PairSeries) -> MetricSeries {
    let (mut ib, mut kf, mut z) = (
        Vec::with_capacity(series.ir.len()),
        Vec::with_capacity(series.ir.len()),
        Vec::with_capacity(series.ir.len()),
    );
    for (&r, &c) in series.ir.iter().zip(&series.ic) {
        let b = compute_ib(r, c);
        let k = compute_kf(r, c);
        ib.push(b);
        kf.push(k);
        z.push(b * k);
    }
    MetricSeries {
        pair: series.pair.clone(),
        window: series.window,
        ib,
        kf,
        z,
    }
}

/// Tab-separated `a b year ib kf z` rows with six-decimal fixed formatting.
/// Years without any flow are left out.
pub fn write_metrics_dump<W: Write>(series: &[MetricSeries], mut out: W) -> io::Result<()> {
    writeln!(out, "a\tb\tyear\tib\tkf\tz")?;
    for m in series {
        for i in 0..m.len() {
            if m.kf[i] == 0.0 {
                continue;
            }
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
                m.pair.a(),
                m.pair.b(),
                m.window.year_at(i),
                m.ib[i],
                m.kf[i],
                m.z[i]
            )?;
        }
    }
    Ok(())
}
