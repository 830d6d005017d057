#![allow(dead_code)]

use varlen_spectrum::stopping_time::db_to_ratio;
use varlen_spectrum::{calibrate_threshold, LengthDistribution};

/// Exact-series law at `db` dB Eb/N0 with E{T} = 1.
pub fn calibrated(db: f64) -> LengthDistribution {
    LengthDistribution::exact(calibrate_threshold(db_to_ratio(db), 1.0).unwrap()).unwrap()
}

/// Composite Simpson rule with `2n` panels; independent of the library quadrature.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let m = 2 * n;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

pub fn uniform(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start + i as f64 * step).collect()
}
