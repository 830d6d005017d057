//! Symbol-length distribution.
//!
//! The receiver accumulates an LLR that behaves as Brownian motion with drift
//! `4γ` and variance `8γ` per unit time; a symbol ends when the LLR first
//! leaves `(-L, L)`. The exit time `T` has the two-sided first-passage density
//!
//! ```text
//! f_T(t) = L e^{-γt} (e^{-L/2} + e^{L/2}) / sqrt(16πγt³)
//!          · Σ_k (1 + 4k) exp(-L²(1 + 4k)² / (16γt))
//! ```
//!
//! and for `L ≫ 1` the single-boundary (inverse Gaussian) form
//!
//! ```text
//! f_T(t) ≈ L / sqrt(16πγt³) · exp(-(L - 4γt)² / (16γt)).
//! ```
//!
//! Every exponential is taken in log space so thresholds in the hundreds or
//! thousands (high SNR with `E{T} = 1`) evaluate without overflow.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::Open01;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::quad::{self, Tolerance};
use crate::streams;

/// Default symmetric truncation of the theta series.
pub const DEFAULT_SERIES_K_MAX: usize = 10;
/// Relative contribution below which the series is considered converged.
const SERIES_REL_TOL: f64 = 1e-12;
const SERIES_HARD_CAP: usize = 1 << 16;
/// Tail mass left beyond the integration cutoff.
const SUPPORT_TAIL: f64 = 1e-9;
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
const TABLE_KNOTS: usize = 4096;

/// SNR and threshold of the symbol-length law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    gamma: f64,
    threshold_l: f64,
    mean_t: f64,
}

impl ChannelParams {
    /// Builds parameters for `γ = P/N₀` and LLR threshold `L`, integrating
    /// the exact density for `E{T}`.
    pub fn new(gamma: f64, threshold_l: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        if !(threshold_l > 0.0 && threshold_l.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "threshold L must be positive, got {threshold_l}"
            )));
        }
        let mean_t = exact_mean(gamma, threshold_l)?;
        Ok(Self { gamma, threshold_l, mean_t })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn threshold_l(&self) -> f64 {
        self.threshold_l
    }

    /// `E{T}` of the exact density.
    pub fn mean_t(&self) -> f64 {
        self.mean_t
    }

    /// `E_b/N₀ = P·E{T}/N₀ = γ·E{T}`.
    pub fn eb_over_n0(&self) -> f64 {
        self.gamma * self.mean_t
    }

    /// Probability that the LLR exits through the wrong boundary, `1/(1+e^L)`.
    pub fn wrong_boundary_probability(&self) -> f64 {
        1.0 / (1.0 + self.threshold_l.exp())
    }
}

/// `10^(db/10)`.
pub fn db_to_ratio(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    ExactSeries,
    LargeLApprox,
}

/// # Invariants
///
/// `pdf(t) = 0` for `t ≤ 0`; `cdf` is nondecreasing with
/// `cdf(upper_support) ≥ 1 - quad_tol`.
#[derive(Debug)]
pub struct LengthDistribution {
    params: ChannelParams,
    form: Form,
    series_k_max: usize,
    upper_support: f64,
    quad_tol: f64,
    mean: f64,
    table: OnceLock<std::result::Result<CdfTable, Error>>,
}

impl Clone for LengthDistribution {
    fn clone(&self) -> Self {
        Self {
            params: self.params,
            form: self.form,
            series_k_max: self.series_k_max,
            upper_support: self.upper_support,
            quad_tol: self.quad_tol,
            mean: self.mean,
            table: OnceLock::new(),
        }
    }
}

impl LengthDistribution {
    pub fn new(params: ChannelParams, form: Form) -> Result<Self> {
        Self::with_options(params, form, DEFAULT_SERIES_K_MAX, DEFAULT_QUAD_TOL)
    }

    pub fn exact(params: ChannelParams) -> Result<Self> {
        Self::new(params, Form::ExactSeries)
    }

    pub fn with_options(params: ChannelParams, form: Form, series_k_max: usize, quad_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0 && quad_tol < 1.0) {
            return Err(Error::InvalidArgument(format!("quad_tol must lie in (0, 1), got {quad_tol}")));
        }
        let mut dist = Self {
            params,
            form,
            series_k_max,
            upper_support: f64::INFINITY,
            quad_tol,
            mean: match form {
                Form::ExactSeries => params.mean_t,
                Form::LargeLApprox => params.threshold_l / (4.0 * params.gamma),
            },
            table: OnceLock::new(),
        };
        dist.upper_support = dist.find_upper_support()?;
        if form == Form::LargeLApprox {
            dist.mean = dist.moment(1)?;
        }
        Ok(dist)
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn series_k_max(&self) -> usize {
        self.series_k_max
    }

    pub fn upper_support(&self) -> f64 {
        self.upper_support
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    /// First moment of this distribution (cached).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub(crate) fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.quad_tol * 1e-2, self.quad_tol * 1e-8)
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        Ok(self.density(t))
    }

    /// Unchecked density used inside quadratures.
    pub(crate) fn density(&self, t: f64) -> f64 {
        match self.form {
            Form::ExactSeries => exact_pdf(self.params.gamma, self.params.threshold_l, t, self.series_k_max),
            Form::LargeLApprox => approx_pdf(self.params.gamma, self.params.threshold_l, t),
        }
    }

    /// Initial subdivision for integrating the density over `[a, b]`.
    pub(crate) fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let (m, s) = scale_hints(self.params.gamma, self.params.threshold_l);
        let around = (-8..=24).map(move |j| m + j as f64 * s);
        let geometric = (-10..=8).map(move |j| m * 2f64.powi(j));
        quad::breakpoints(a, b, around.chain(geometric))
    }

    /// `∫_a^b w(t) f_T(t) dt` with `b` clipped to the support.
    pub(crate) fn integrate_weighted(&self, a: f64, b: f64, w: impl Fn(f64) -> f64) -> Result<f64> {
        let a = a.max(0.0);
        let b = b.min(self.upper_support);
        if !(b > a) {
            return Ok(0.0);
        }
        quad::integrate(|t| w(t) * self.density(t), &self.breakpoints(a, b), self.tolerance())
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if t <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.integrate_weighted(0.0, t, |_| 1.0)?.clamp(0.0, 1.0))
    }

    /// `P(T > t)`, integrated over the tail directly rather than as `1 - cdf`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        ensure_finite("t", t)?;
        if t <= 0.0 {
            return Ok(1.0);
        }
        Ok(self.integrate_weighted(t, self.upper_support, |_| 1.0)?.clamp(0.0, 1.0))
    }

    /// CDF at each of `sorted` (ascending), integrating only between
    /// consecutive points.
    pub fn cdf_sorted(&self, sorted: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(sorted.len());
        let mut acc = 0.0;
        let mut prev = 0.0f64;
        for &x in sorted {
            ensure_finite("t", x)?;
            if x < prev {
                return Err(Error::InvalidArgument("cdf_sorted expects ascending input".into()));
            }
            let hi = x.clamp(0.0, self.upper_support);
            if hi > prev {
                acc += quad::integrate(|t| self.density(t), &[prev, hi], self.tolerance())?;
                prev = hi;
            }
            out.push(acc.clamp(0.0, 1.0));
        }
        Ok(out)
    }

    /// `E{T^order}` for order 1 or 2.
    pub fn moment(&self, order: u32) -> Result<f64> {
        match order {
            1 => self.integrate_weighted(0.0, self.upper_support, |t| t),
            2 => self.integrate_weighted(0.0, self.upper_support, |t| t * t),
            _ => Err(Error::Unsupported(format!("moment of order {order}; only 1 and 2 are provided"))),
        }
    }

    pub fn variance(&self) -> Result<f64> {
        Ok((self.moment(2)? - self.mean * self.mean).max(0.0))
    }

    /// Smallest `t` with `P(T > t) < 1e-9`: doubling from `8·E{T}`, then bisection.
    fn find_upper_support(&self) -> Result<f64> {
        let (m, _) = scale_hints(self.params.gamma, self.params.threshold_l);
        let start = 8.0 * self.mean.max(m);
        let tail = |t: f64| -> Result<f64> {
            integrate_to_infinity(|s| self.density(s), &self.breakpoints_unbounded(t), self.tolerance())
        };
        let mut hi = start;
        let mut guard = 0;
        while tail(hi)? >= SUPPORT_TAIL {
            hi *= 2.0;
            guard += 1;
            if guard > 60 {
                return Err(Error::Consistency("density tail does not decay".into()));
            }
        }
        let mut lo = if guard == 0 { 0.0 } else { hi / 2.0 };
        while hi - lo > 1e-4 * hi {
            let mid = 0.5 * (lo + hi);
            if tail(mid)? < SUPPORT_TAIL {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    fn breakpoints_unbounded(&self, a: f64) -> Vec<f64> {
        let (m, s) = scale_hints(self.params.gamma, self.params.threshold_l);
        let far = (m + 40.0 * s).max(2.0 * a).max(a + s);
        self.breakpoints(a, far)
    }

    /// Inverse-CDF table used by [`sample_lengths`](Self::sample_lengths), built once.
    pub fn cdf_table(&self) -> Result<&CdfTable> {
        self.table
            .get_or_init(|| CdfTable::build(self))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `n` independent lengths by inverse-CDF sampling; deterministic in `seed`.
    pub fn sample_lengths(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if self.form != Form::ExactSeries {
            return Err(Error::InvalidArgument("sampling requires the exact-series form".into()));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let table = self.cdf_table()?;
        let mut rng = streams::stream(seed, 0);
        Ok((0..n).map(|_| table.draw(&mut rng)).collect())
    }
}

/// Monotone `(t, F(t))` knots with linear inverse interpolation.
#[derive(Debug, Clone)]
pub struct CdfTable {
    knots: Vec<f64>,
    cdf: Vec<f64>,
}

impl CdfTable {
    fn build(dist: &LengthDistribution) -> Result<Self> {
        let upper = dist.upper_support;
        let half = TABLE_KNOTS / 2;
        // Log-spaced knots near zero, where the density switches on steeply,
        // merged with a uniform grid over the bulk.
        let lo = upper * 1e-6;
        let mut knots: Vec<f64> = (0..half)
            .map(|i| lo * (upper / lo).powf(i as f64 / (half - 1) as f64))
            .chain((1..=half).map(|i| upper * i as f64 / half as f64))
            .collect();
        knots.push(0.0);
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * upper);
        let cdf = dist.cdf_sorted(&knots)?;
        Self::from_knots(knots, cdf)
    }

    /// Table from explicit knots; fails if either column decreases.
    pub fn from_knots(knots: Vec<f64>, mut cdf: Vec<f64>) -> Result<Self> {
        if knots.len() != cdf.len() || knots.len() < 2 {
            return Err(Error::Consistency("cdf table needs matching columns of length >= 2".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) || cdf.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Consistency("cdf table is not monotone".into()));
        }
        let last = *cdf.last().expect("non-empty");
        if !(last > 0.0) {
            return Err(Error::Consistency("cdf table carries no mass".into()));
        }
        // Renormalize the truncated tail so every u in (0,1) inverts inside the support.
        for c in &mut cdf {
            *c /= last;
        }
        Ok(Self { knots, cdf })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.cdf
    }

    /// Inverse CDF at `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (t0, t1) = (self.knots[i - 1], self.knots[i]);
        if c1 > c0 {
            t0 + (t1 - t0) * (u - c0) / (c1 - c0)
        } else {
            t1
        }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile(u)
    }
}

/// Rough mean and spread of `T`, used only to place quadrature breakpoints.
fn scale_hints(gamma: f64, l: f64) -> (f64, f64) {
    let mean = l / (4.0 * gamma) * (0.5 * l).tanh();
    let spread = (l / (8.0 * gamma * gamma)).sqrt().min(mean);
    (mean, spread)
}

fn exact_mean(gamma: f64, l: f64) -> Result<f64> {
    let (m, s) = scale_hints(gamma, l);
    let pts = quad::breakpoints(
        0.0,
        m + 40.0 * s,
        (-8..=24).map(|j| m + j as f64 * s).chain((-10..=8).map(|j| m * 2f64.powi(j))),
    );
    integrate_to_infinity(
        |t| t * exact_pdf(gamma, l, t, DEFAULT_SERIES_K_MAX),
        &pts,
        Tolerance::new(1e-12, 1e-300),
    )
}

/// `∫_a^∞ f` for an exponentially decaying integrand: the seeded range, then
/// doubling pieces until one contributes negligibly.
fn integrate_to_infinity(f: impl Fn(f64) -> f64, pts: &[f64], tol: Tolerance) -> Result<f64> {
    let mut total: f64 = quad::integrate(&f, pts, tol)?;
    let mut lo = *pts.last().expect("non-empty breakpoints");
    for _ in 0..64 {
        let hi = 2.0 * lo;
        let piece_tol = Tolerance::new(tol.rel, tol.abs.max(tol.rel * total.abs() * 1e-3));
        let piece: f64 = quad::integrate(&f, &quad::refine(&[lo, hi], lo / 4.0), piece_tol)?;
        total += piece;
        if piece.abs() <= 1e-17 * total.abs().max(1e-300) || piece == 0.0 {
            return Ok(total);
        }
        lo = hi;
    }
    Err(Error::Consistency("tail integral did not converge".into()))
}

/// Exact two-boundary density; the `Σ_k` is grown from `±k_start` by doubling
/// until the last pair of terms is below `1e-12` relative.
///
/// Once `t ≫ L²/16γ` the alternating theta sum cancels catastrophically, so
/// there the same function is summed in its Poisson-dual (eigenfunction)
/// form, `e^{-γt} cosh(L/2) (4πγ/L²) Σ_n (-1)^n (2n+1) e^{-(2n+1)²π²γt/L²}`.
pub fn exact_pdf(gamma: f64, l: f64, t: f64, k_start: usize) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    let a = l * l / (16.0 * gamma * t);
    let log_cosh = 0.5 * l + (-l).exp().ln_1p();
    if a >= PI / 4.0 {
        let log_base = l.ln() - gamma * t + log_cosh - 0.5 * (16.0 * PI * gamma * t * t * t).ln() - a;
        if log_base < -745.0 {
            return 0.0;
        }
        let pair = |k: usize| {
            let kp = 1.0 + 4.0 * k as f64;
            let km = 1.0 - 4.0 * k as f64;
            kp * (-a * (kp * kp - 1.0)).exp() + km * (-a * (km * km - 1.0)).exp()
        };
        let sum = converged_sum(1.0, pair, k_start);
        if sum <= 0.0 {
            return 0.0;
        }
        (log_base + sum.ln()).exp()
    } else {
        let b = PI * PI * gamma * t / (l * l);
        let log_base = -gamma * t + log_cosh - std::f64::consts::LN_2 + (4.0 * PI * gamma / (l * l)).ln() - b;
        if log_base < -745.0 {
            return 0.0;
        }
        let term = |n: usize| {
            let odd = (2 * n + 1) as f64;
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * odd * (-b * (odd * odd - 1.0)).exp()
        };
        let sum = converged_sum(1.0, term, k_start);
        if sum <= 0.0 {
            return 0.0;
        }
        (log_base + sum.ln()).exp()
    }
}

fn converged_sum(first: f64, term: impl Fn(usize) -> f64, k_start: usize) -> f64 {
    let mut sum = first;
    let mut k = 1;
    let mut limit = k_start.max(1);
    loop {
        let mut last = 0.0;
        while k <= limit {
            last = term(k);
            sum += last;
            k += 1;
        }
        if last.abs() <= SERIES_REL_TOL * sum.abs() || limit >= SERIES_HARD_CAP {
            return sum;
        }
        limit *= 2;
    }
}

/// Large-threshold (inverse Gaussian) density.
pub fn approx_pdf(gamma: f64, l: f64, t: f64) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    let d = l - 4.0 * gamma * t;
    (l.ln() - 0.5 * (16.0 * PI * gamma * t * t * t).ln() - d * d / (16.0 * gamma * t)).exp()
}

/// Finds `L` with `E{T}(γ, L) = target_mean`, searching `L ∈ [1e-3, 64·γ·target_mean]`.
pub fn calibrate_threshold(gamma: f64, target_mean: f64) -> Result<ChannelParams> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    if !(target_mean > 0.0 && target_mean.is_finite()) {
        return Err(Error::InvalidArgument(format!("target mean must be positive, got {target_mean}")));
    }
    let (lo, hi) = (1e-3, 64.0 * gamma * target_mean);
    if !(hi > lo) {
        return Err(Error::CalibrationFailure { target: target_mean, lo, hi });
    }
    let f = |l: f64| exact_mean(gamma, l).map(|m| m - target_mean);
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::CalibrationFailure { target: target_mean, lo, hi });
    }
    let l = brent(f, lo, hi, flo, fhi, 1e-12 * target_mean)?;
    ChannelParams::new(gamma, l)
}

/// Brent's method; stops once `|f| ≤ ftol` or the bracket collapses.
fn brent(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    ftol: f64,
) -> Result<f64> {
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb.abs() <= ftol || (b - a).abs() <= 4.0 * f64::EPSILON * b.abs() {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let q = (3.0 * a + b) / 4.0;
        let outside = !((s > q.min(b)) && (s < q.max(b)));
        if outside
            || (bisected && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!bisected && (s - b).abs() >= (c - d).abs() / 2.0)
        {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s)?;
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calibrated(db: f64) -> LengthDistribution {
        let p = calibrate_threshold(db_to_ratio(db), 1.0).unwrap();
        LengthDistribution::exact(p).unwrap()
    }

    // Closed-form mean of the two-sided exit time, E{T} = (L/4γ) tanh(L/2).
    fn closed_form_mean(gamma: f64, l: f64) -> f64 {
        l / (4.0 * gamma) * (0.5 * l).tanh()
    }

    #[test]
    fn pdf_vanishes_on_nonpositive_time() {
        let d = calibrated(10.0);
        assert_eq!(d.pdf(-0.5).unwrap(), 0.0);
        assert_eq!(d.pdf(0.0).unwrap(), 0.0);
        assert!(d.pdf(f64::NAN).is_err());
        assert!(d.cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn mean_matches_closed_form() {
        for &(g, l) in &[(1.0, 0.5), (1.0, 3.0), (10.0, 40.0), (3.0, 12.0)] {
            let p = ChannelParams::new(g, l).unwrap();
            let exact = closed_form_mean(g, l);
            assert!((p.mean_t() - exact).abs() < 1e-9 * exact, "g={g} l={l}: {} vs {exact}", p.mean_t());
        }
    }

    #[test]
    fn normalization_and_cdf_ends() {
        let d = calibrated(10.0);
        assert_eq!(d.cdf(0.0).unwrap(), 0.0);
        let total = d.cdf(d.upper_support()).unwrap();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        assert!(d.cdf(0.8).unwrap() <= d.cdf(1.2).unwrap());
    }

    #[test]
    fn moments() {
        let d = calibrated(10.0);
        assert!((d.moment(1).unwrap() - 1.0).abs() < 1e-6);
        assert!(matches!(d.moment(3), Err(Error::Unsupported(_))));
        let d5 = calibrated(5.0);
        let m1 = d5.moment(1).unwrap();
        assert!(d5.moment(2).unwrap() >= m1 * m1);
        let narrow = calibrated(30.0);
        assert!((narrow.moment(2).unwrap() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn calibration_near_four_gamma() {
        let g = db_to_ratio(15.0);
        let p = calibrate_threshold(g, 1.0).unwrap();
        assert!((p.threshold_l() / (4.0 * g) - 1.0).abs() < 0.1);
        assert!((p.mean_t() - 1.0).abs() < 1e-6);
        assert!((p.eb_over_n0() - g).abs() < 1e-5);
    }

    #[test]
    fn calibration_threshold_grows_with_snr() {
        let a = calibrate_threshold(db_to_ratio(5.0), 1.0).unwrap();
        let b = calibrate_threshold(db_to_ratio(10.0), 1.0).unwrap();
        assert!(a.threshold_l() < b.threshold_l());
    }

    #[test]
    fn calibration_rejects_bad_input() {
        assert!(calibrate_threshold(-1.0, 1.0).is_err());
        assert!(calibrate_threshold(1.0, 0.0).is_err());
    }

    #[test]
    fn exact_and_approx_agree_at_large_threshold() {
        let p = calibrate_threshold(10.0, 1.0).unwrap();
        let peak = (0..=100)
            .map(|i| exact_pdf(10.0, p.threshold_l(), 0.5 + i as f64 * 0.01, 10))
            .fold(0.0, f64::max);
        for i in 0..=100 {
            let t = 0.5 + i as f64 * 0.01;
            let e = exact_pdf(10.0, p.threshold_l(), t, 10);
            let a = approx_pdf(10.0, p.threshold_l(), t);
            assert!((e - a).abs() / peak < 1e-2, "t={t}");
        }
    }

    #[test]
    fn series_truncation_converged() {
        for &(g, l) in &[(10.0, 40.0), (1.0, 1.0), (3.16, 12.6)] {
            for i in 1..60 {
                let t = i as f64 * 0.1;
                let a = exact_pdf(g, l, t, DEFAULT_SERIES_K_MAX);
                let b = exact_pdf(g, l, t, DEFAULT_SERIES_K_MAX + 4);
                assert!((a - b).abs() < 1e-10, "g={g} l={l} t={t}: {a} {b}");
            }
        }
    }

    #[test]
    fn high_threshold_does_not_overflow() {
        let v = exact_pdf(1000.0, 4000.0, 1.0, 10);
        assert!(v.is_finite() && v > 1.0);
        assert!(approx_pdf(1000.0, 4000.0, 1.0).is_finite());
    }

    #[test]
    fn sampling_is_reproducible_and_positive() {
        let d = calibrated(10.0);
        let a = d.sample_lengths(1000, 42).unwrap();
        let b = d.sample_lengths(1000, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| x > 0.0 && x <= d.upper_support()));
        assert!(d.sample_lengths(0, 1).unwrap().is_empty());
    }

    #[test]
    fn non_monotone_table_rejected() {
        let r = CdfTable::from_knots(vec![0.0, 1.0, 2.0], vec![0.0, 0.6, 0.5]);
        assert!(matches!(r, Err(Error::Consistency(_))));
    }

    #[test]
    fn approx_form_cannot_be_sampled() {
        let p = calibrate_threshold(10.0, 1.0).unwrap();
        let d = LengthDistribution::new(p, Form::LargeLApprox).unwrap();
        assert!(d.sample_lengths(10, 0).is_err());
        assert!((d.mean() - p.threshold_l() / 40.0).abs() < 1e-6);
    }
}
