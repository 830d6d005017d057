//! Random-length antipodal pulse trains and ensemble autocorrelation.

use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;

use crate::autocorr::{AcfCurve, AcfKind};
use crate::error::{ensure_finite, Error, Result};
use crate::output::sig15;
use crate::stopping_time::LengthDistribution;
use crate::streams;

/// Ensembles smaller than this set [`EmpiricalAcf::low_ensemble_warning`].
pub const MIN_MEANINGFUL_ENSEMBLE: usize = 100;

/// One transmitted sequence `X(t) = Σ_k B_k p((t - S_k)/T_k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Realization {
    signs: Vec<i8>,
    lengths: Vec<f64>,
    starts: Vec<f64>,
    span: f64,
}

impl Realization {
    /// Builds the start times from `lengths`; `signs` must be `±1`.
    pub fn from_parts(signs: Vec<i8>, lengths: Vec<f64>) -> Result<Self> {
        if signs.is_empty() || signs.len() != lengths.len() {
            return Err(Error::InvalidArgument("need equally many (>= 1) signs and lengths".into()));
        }
        if signs.iter().any(|&b| b != 1 && b != -1) {
            return Err(Error::InvalidArgument("signs must be +1 or -1".into()));
        }
        if lengths.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidArgument("lengths must be positive and finite".into()));
        }
        let mut starts = Vec::with_capacity(lengths.len());
        let mut s = 0.0;
        for &t in &lengths {
            starts.push(s);
            s += t;
        }
        Ok(Self { signs, lengths, starts, span: s })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// `X(t)`: the pulse sign strictly inside a pulse, `0` at pulse edges and
    /// outside `(0, span)`.
    pub fn eval(&self, t: f64) -> i8 {
        if !(t > 0.0 && t < self.span) {
            return 0;
        }
        let k = self.starts.partition_point(|&s| s < t) - 1;
        let end = if k + 1 < self.starts.len() { self.starts[k + 1] } else { self.span };
        if t < end {
            self.signs[k]
        } else {
            0
        }
    }

    /// Columns `k,sign,length,start`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,sign,length,start")?;
        for k in 0..self.len() {
            writeln!(w, "{k},{},{},{}", self.signs[k], sig15(self.lengths[k]), sig15(self.starts[k]))?;
        }
        Ok(())
    }
}

/// `K_plus_one` symbols with i.i.d. uniform signs and lengths from `dist`.
pub fn generate(dist: &LengthDistribution, k_plus_one: usize, seed: u64) -> Result<Realization> {
    if k_plus_one == 0 {
        return Err(Error::InvalidArgument("a realization needs at least one symbol".into()));
    }
    let lengths = dist.sample_lengths(k_plus_one, streams::derive_seed(seed, 0))?;
    let mut rng = streams::stream(seed, 1);
    let signs = (0..k_plus_one).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    Realization::from_parts(signs, lengths)
}

pub fn eval_waveform(r: &Realization, t: f64) -> i8 {
    r.eval(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalAcf {
    pub curve: AcfCurve,
    /// Normal-approximation standard error of each lag's mean.
    pub std_errors: Vec<f64>,
    pub low_ensemble_warning: bool,
}

/// Ensemble average of `X(t+τ)X(t)` over independent realizations.
///
/// Realization `i` uses seed `derive(seed, i)`; the reduction sums integer
/// products, so the result does not depend on thread scheduling.
pub fn empirical_acf(
    dist: &LengthDistribution,
    t: f64,
    taus: &[f64],
    k_plus_one: usize,
    n_realizations: usize,
    seed: u64,
) -> Result<EmpiricalAcf> {
    ensure_finite("t", t)?;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    for &tau in taus {
        ensure_finite("tau", tau)?;
        if tau < 0.0 {
            return Err(Error::InvalidArgument(format!("taus must be nonnegative, got {tau}")));
        }
    }
    if n_realizations == 0 {
        return Err(Error::InsufficientSamples("empirical_acf needs at least one realization".into()));
    }
    if k_plus_one == 0 {
        return Err(Error::InvalidArgument("a realization needs at least one symbol".into()));
    }
    // Build the sampling table once, outside the parallel section.
    dist.cdf_table()?;

    const BATCH: usize = 256;
    let batches = n_realizations.div_ceil(BATCH);
    let partial = streams::map_indexed(batches, |b| -> Result<(Vec<i64>, Vec<i64>)> {
        let mut sum = vec![0i64; taus.len()];
        let mut sum_sq = vec![0i64; taus.len()];
        for i in b * BATCH..((b + 1) * BATCH).min(n_realizations) {
            let r = generate(dist, k_plus_one, streams::derive_seed(seed, i as u64))?;
            let x0 = r.eval(t) as i64;
            if x0 == 0 {
                continue;
            }
            for (j, &tau) in taus.iter().enumerate() {
                let p = x0 * r.eval(t + tau) as i64;
                sum[j] += p;
                sum_sq[j] += p * p;
            }
        }
        Ok((sum, sum_sq))
    });
    let mut sum = vec![0i64; taus.len()];
    let mut sum_sq = vec![0i64; taus.len()];
    for p in partial {
        let (s, q) = p?;
        for j in 0..taus.len() {
            sum[j] += s[j];
            sum_sq[j] += q[j];
        }
    }

    let n = n_realizations as f64;
    let values: Vec<f64> = sum.iter().map(|&s| s as f64 / n).collect();
    let std_errors = values
        .iter()
        .zip(&sum_sq)
        .map(|(&m, &q)| ((q as f64 / n - m * m).max(0.0) / n).sqrt())
        .collect();
    Ok(EmpiricalAcf {
        curve: AcfCurve {
            taus: taus.to_vec(),
            values,
            kind: AcfKind::Empirical { t, ensemble_size: n_realizations },
        },
        std_errors,
        low_ensemble_warning: n_realizations < MIN_MEANINGFUL_ENSEMBLE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stopping_time::{calibrate_threshold, db_to_ratio};

    fn dist10() -> LengthDistribution {
        LengthDistribution::exact(calibrate_threshold(db_to_ratio(10.0), 1.0).unwrap()).unwrap()
    }

    #[test]
    fn single_symbol() {
        let r = generate(&dist10(), 1, 3).unwrap();
        assert_eq!(r.starts(), &[0.0]);
        assert_eq!(r.span(), r.lengths()[0]);
    }

    #[test]
    fn zero_symbols_rejected() {
        assert!(generate(&dist10(), 0, 3).is_err());
    }

    #[test]
    fn waveform_boundaries() {
        let r = Realization::from_parts(vec![1, -1, 1], vec![0.5, 1.0, 0.25]).unwrap();
        assert_eq!(r.eval(-1.0), 0);
        assert_eq!(r.eval(0.0), 0);
        assert_eq!(r.eval(0.25), 1);
        assert_eq!(r.eval(0.5), 0);
        assert_eq!(r.eval(0.75), -1);
        assert_eq!(r.eval(1.5), 0);
        assert_eq!(r.eval(1.6), 1);
        assert_eq!(r.eval(r.span()), 0);
        assert_eq!(r.eval(r.span() + 1.0), 0);
    }

    #[test]
    fn bad_parts_rejected() {
        assert!(Realization::from_parts(vec![2], vec![1.0]).is_err());
        assert!(Realization::from_parts(vec![1], vec![0.0]).is_err());
        assert!(Realization::from_parts(vec![1, 1], vec![1.0]).is_err());
    }

    #[test]
    fn csv_layout() {
        let r = Realization::from_parts(vec![1, -1], vec![0.5, 1.5]).unwrap();
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "k,sign,length,start\n0,1,0.5,0\n1,-1,1.5,0.5\n");
    }

    #[test]
    fn small_ensemble_flagged() {
        let e = empirical_acf(&dist10(), 5.0, &[0.0, 0.5], 11, 50, 1).unwrap();
        assert!(e.low_ensemble_warning);
        assert_eq!(e.curve.kind, AcfKind::Empirical { t: 5.0, ensemble_size: 50 });
        assert!((e.curve.values[0] - 1.0).abs() < 1e-12);
        assert!(empirical_acf(&dist10(), 5.0, &[-0.5], 11, 50, 1).is_err());
        assert!(empirical_acf(&dist10(), 0.0, &[0.5], 11, 50, 1).is_err());
    }

    #[test]
    fn lag_beyond_signal_is_zero() {
        let e = empirical_acf(&dist10(), 2.0, &[50.0], 6, 200, 4).unwrap();
        assert_eq!(e.curve.values[0], 0.0);
        assert_eq!(e.std_errors[0], 0.0);
    }
}
