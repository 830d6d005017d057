//! Goodness-of-fit helpers.

use serde::Serialize;

/// Asymptotic Kolmogorov critical coefficient `c(α) = sqrt(-ln(α/2)/2)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Two-sided KS distance between ascending `sorted` samples and model CDF
/// values `cdf[i] = F(sorted[i])`.
pub fn ks_statistic(cdf: &[f64]) -> f64 {
    let n = cdf.len() as f64;
    cdf.iter()
        .enumerate()
        .map(|(i, &f)| {
            let below = f - i as f64 / n;
            let above = (i + 1) as f64 / n - f;
            below.max(above)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsReport {
    pub n: usize,
    pub statistic: f64,
    pub critical: f64,
    pub alpha: f64,
    pub pass: bool,
}

impl KsReport {
    pub fn from_cdf(cdf: &[f64], alpha: f64) -> Self {
        let statistic = ks_statistic(cdf);
        let critical = ks_critical(cdf.len(), alpha);
        Self { n: cdf.len(), statistic, critical, alpha, pass: statistic < critical }
    }
}

pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_has_small_distance() {
        let n = 1000;
        let cdf: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_statistic(&cdf) - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn one_percent_coefficient() {
        assert!((ks_critical(1, 0.01) - 1.6276).abs() < 1e-4);
    }
}
