//! Autocorrelation of the random-length antipodal pulse train.
//!
//! For `t, τ > 0` and `K + 1` symbols,
//!
//! ```text
//! R(t, τ) = 1 - F_T(t + τ) + ∫_{-∞}^t g(s; τ) ds
//! ```
//!
//! where `g(·; τ)` is the inverse Fourier transform of
//!
//! ```text
//! G(ω; τ) = Φ(ω) (1 - Φ(ω)^K) / (1 - Φ(ω)) · Q(ω; τ),
//! Q(ω; τ) = ∫_τ^∞ f_T(s) (1 - e^{jω(τ - s)}) ds,
//! Φ(ω)    = ∫_0^∞ f_T(s) e^{-jωs} ds,
//! ```
//!
//! and `K → ∞` drops the `Φ^K` term. The large-`t` limit is the DC value
//! of `G`, which L'Hospital's rule reduces to
//! `R(τ) = (1/E{T}) ∫_τ^∞ (s - τ) f_T(s) ds`, extended evenly in `τ`.
//!
//! The point-wise operations ([`char_fn`], [`q_fn`], [`g_kernel`]) use adaptive
//! quadrature split at oscillation periods. [`acf_finite`] instead tabulates
//! the density once on Gauss–Legendre panels (with a panel edge at every
//! requested lag), evaluates `G` on a symmetric frequency grid, and
//! integrates the inverse transform over `[0, t]` bin by bin.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::quad::{self, GaussLegendre};
use crate::stopping_time::LengthDistribution;
use crate::streams;

/// Smallest transform size accepted by [`FreqGrid`].
pub const MIN_GRID_POINTS: usize = 1 << 12;
const MAX_GRID_POINTS: usize = 1 << 22;
const PANEL_POINTS: usize = 12;
/// Largest phase change `ω_max·h` across one Gauss–Legendre panel.
const PANEL_PHASE: f64 = 3.0;
const TAU_BLOCK: usize = 64;
const OSCILLATORY_ABS_TOL: f64 = 1e-13;
const BANDWIDTH_FLOOR: f64 = 1e-10;

/// Number of symbols after the first (`K`), or an unbounded train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolCount {
    Finite(u32),
    Infinite,
}

/// Symmetric frequency grid `ω_n = n·dω`, `n ∈ [-N/2, N/2)`, `dω = 2ω_max/N`.
///
/// Sampling `G` at spacing `dω` periodizes its inverse transform with period
/// `2π/dω`, which bounds the usable `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqGrid {
    omega_max: f64,
    n_points: usize,
}

impl FreqGrid {
    pub fn new(omega_max: f64, n_points: usize) -> Result<Self> {
        if !(omega_max > 0.0 && omega_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("omega_max must be positive, got {omega_max}")));
        }
        if !n_points.is_power_of_two() || n_points < MIN_GRID_POINTS {
            return Err(Error::InvalidArgument(format!(
                "n_points must be a power of two >= {MIN_GRID_POINTS}, got {n_points}"
            )));
        }
        Ok(Self { omega_max, n_points })
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.omega_max / self.n_points as f64
    }

    /// Nyquist time step of the band limit.
    pub fn time_step(&self) -> f64 {
        PI / self.omega_max
    }

    /// Period of the aliased inverse transform.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.spacing()
    }

    pub fn doubled(&self) -> Self {
        Self { omega_max: self.omega_max, n_points: self.n_points * 2 }
    }

    /// Largest `t` for which no periodic image of `g` lands in `[0, t]`.
    pub fn max_usable_t(&self, dist: &LengthDistribution, symbols: SymbolCount) -> Result<f64> {
        Ok(self.period() - kernel_extent(dist, symbols)?)
    }

    /// A grid resolving `Φ` down to `1e-10` and wide enough for `t ≤ t_max`.
    pub fn auto(dist: &LengthDistribution, symbols: SymbolCount, t_max: f64) -> Result<Self> {
        let omega_max = bandwidth(dist)?;
        let needed = t_max.max(0.0) + kernel_extent(dist, symbols)?;
        let n = (needed * omega_max / PI).ceil() as usize;
        let n = n.next_power_of_two().max(MIN_GRID_POINTS);
        if n > MAX_GRID_POINTS {
            return Err(Error::Resolution(format!(
                "inverse transform would need {n} points (> {MAX_GRID_POINTS}) to reach t = {t_max}"
            )));
        }
        Self::new(omega_max, n)
    }
}

/// Smallest `ω` (on a `2π/(4·E{T})` ladder) beyond which `|Φ| < 1e-10`, or
/// beyond which `|Φ|` is no larger than the `f(upper)/ω` ripple left by
/// truncating the support.
fn bandwidth(dist: &LengthDistribution) -> Result<f64> {
    let step = 2.0 * PI / (4.0 * dist.mean());
    let jump = dist.density(dist.upper_support());
    let settled = |omega: f64| -> Result<bool> {
        Ok(char_fn(dist, omega)?.norm() < BANDWIDTH_FLOOR.max(4.0 * jump / omega))
    };
    let mut omega = step;
    for _ in 0..100_000 {
        if settled(omega)? && settled(omega + step)? {
            return Ok(omega + step);
        }
        omega += step;
    }
    Err(Error::Resolution("characteristic function does not decay".into()))
}

/// Time beyond which `g(·; τ)` is negligible.
fn kernel_extent(dist: &LengthDistribution, symbols: SymbolCount) -> Result<f64> {
    let m = dist.mean();
    match symbols {
        SymbolCount::Finite(k) => {
            let k = k as f64;
            Ok(k * m + 10.0 * (k * dist.variance()?).sqrt() + dist.upper_support())
        }
        SymbolCount::Infinite => {
            // The renewal kernel settles like |Φ(2π/E{T})|^{s/E{T}}.
            let rho = char_fn(dist, 2.0 * PI / m)?.norm();
            if !(rho < 1.0) {
                return Err(Error::Resolution("length distribution is (numerically) degenerate".into()));
            }
            Ok(1.5 * m * (1e-10f64).ln() / rho.ln() + dist.upper_support())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AcfKind {
    FiniteK { t: f64, symbols: SymbolCount },
    Limit,
    Empirical { t: f64, ensemble_size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcfCurve {
    pub taus: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: AcfKind,
}

/// `Φ(ω) = E{e^{-jωT}}`; exactly `1` at `ω = 0`.
pub fn char_fn(dist: &LengthDistribution, omega: f64) -> Result<Complex64> {
    ensure_finite("omega", omega)?;
    if omega == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    oscillatory(dist, 0.0, omega, |s| Complex64::from_polar(1.0, -omega * s))
}

/// `Q(ω; τ) = ∫_τ^∞ f_T(s)(1 - e^{jω(τ-s)}) ds`.
pub fn q_fn(dist: &LengthDistribution, omega: f64, tau: f64) -> Result<Complex64> {
    ensure_finite("omega", omega)?;
    ensure_finite("tau", tau)?;
    if tau < 0.0 {
        return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {tau}")));
    }
    if omega == 0.0 || tau >= dist.upper_support() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    oscillatory(dist, tau, omega, |s| one - Complex64::from_polar(1.0, omega * (tau - s)))
}

fn oscillatory(
    dist: &LengthDistribution,
    from: f64,
    omega: f64,
    kernel: impl Fn(f64) -> Complex64,
) -> Result<Complex64> {
    let pts = quad::refine(&dist.breakpoints(from, dist.upper_support()), 2.0 * PI / omega.abs());
    // |kernel| ≤ 2 against unit mass, so cancellation caps what relative
    // accuracy can mean at large ω.
    let tol = dist.tolerance();
    let tol = quad::Tolerance::new(tol.rel, tol.abs.max(OSCILLATORY_ABS_TOL));
    quad::integrate(|s| kernel(s) * dist.density(s), &pts, tol)
}

fn geometric_factor(phi: Complex64, symbols: SymbolCount) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    match symbols {
        SymbolCount::Finite(k) => phi * (one - phi.powu(k)) / (one - phi),
        SymbolCount::Infinite => phi / (one - phi),
    }
}

/// `G(ω; τ)` for `ω > 0`. The DC value is [`kernel_dc_limit`].
pub fn g_kernel(dist: &LengthDistribution, omega: f64, tau: f64, symbols: SymbolCount) -> Result<Complex64> {
    ensure_finite("omega", omega)?;
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "G is evaluated only for omega > 0 (got {omega}); use the DC limit"
        )));
    }
    let q = q_fn(dist, omega, tau)?;
    if q == Complex64::new(0.0, 0.0) {
        return Ok(q);
    }
    Ok(geometric_factor(char_fn(dist, omega)?, symbols) * q)
}

/// `lim_{ω→0} G(ω; τ)` for the unbounded train, as `-Q'(0;τ)/Φ'(0)` with
/// `Q'(0;τ) = -j[τ·P(T>τ) - ∫_τ^∞ s f_T(s) ds]` and `Φ'(0) = -j·E{T}`.
/// For a finite train the limit is `K·Q(0;τ) = 0`.
pub fn kernel_dc_limit(dist: &LengthDistribution, tau: f64, symbols: SymbolCount) -> Result<f64> {
    ensure_finite("tau", tau)?;
    let tau = tau.abs();
    if let SymbolCount::Finite(_) = symbols {
        return Ok(0.0);
    }
    if tau >= dist.upper_support() {
        return Ok(0.0);
    }
    let survival = dist.survival(tau)?;
    let partial_mean = dist.integrate_weighted(tau, dist.upper_support(), |s| s)?;
    let first_moment = dist.integrate_weighted(0.0, dist.upper_support(), |s| s)?;
    let q_prime = Complex64::new(0.0, -(tau * survival - partial_mean));
    let phi_prime = Complex64::new(0.0, -first_moment);
    Ok((-q_prime / phi_prime).re)
}

/// Stationary autocorrelation `R(τ) = (1/E{T}) ∫_{|τ|}^∞ (s - |τ|) f_T(s) ds`.
pub fn acf_limit(dist: &LengthDistribution, tau: f64) -> Result<f64> {
    ensure_finite("tau", tau)?;
    let tau = tau.abs();
    let excess = dist.integrate_weighted(tau, dist.upper_support(), |s| s - tau)?;
    Ok(excess / dist.mean())
}

pub fn acf_limit_curve(dist: &LengthDistribution, taus: &[f64]) -> Result<AcfCurve> {
    check_ascending(taus)?;
    let values = streams::map_indexed(taus.len(), |i| acf_limit(dist, taus[i]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(AcfCurve { taus: taus.to_vec(), values, kind: AcfKind::Limit })
}

fn check_ascending(taus: &[f64]) -> Result<()> {
    for &x in taus {
        ensure_finite("tau", x)?;
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("taus must be strictly ascending".into()));
    }
    Ok(())
}

/// Density tabulated on Gauss–Legendre panels; each lag is a panel edge so
/// tail sums `Σ_{x_i > τ}` are exact partial quadratures.
struct SpectralTable {
    nodes: Vec<f64>,
    mass: Vec<f64>,
}

impl SpectralTable {
    fn build(dist: &LengthDistribution, omega_max: f64, taus: &[f64]) -> Self {
        let upper = dist.upper_support();
        let mut edges = dist.breakpoints(0.0, upper);
        edges.extend(taus.iter().copied().filter(|&t| t > 0.0 && t < upper));
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * upper);
        let edges = quad::refine(&edges, PANEL_PHASE / omega_max);
        let gl = GaussLegendre::new(PANEL_POINTS);
        let mut nodes = Vec::with_capacity(edges.len() * PANEL_POINTS);
        let mut mass = Vec::with_capacity(edges.len() * PANEL_POINTS);
        for w in edges.windows(2) {
            for (x, wt) in gl.on(w[0], w[1]) {
                let m = wt * dist.density(x);
                if m > 0.0 {
                    nodes.push(x);
                    mass.push(m);
                }
            }
        }
        Self { nodes, mass }
    }

    fn first_index_above(&self, tau: f64) -> usize {
        self.nodes.partition_point(|&x| x <= tau)
    }
}

/// `R(t, τ)` for a single `(t, τ)`; see [`acf_finite_surface`].
pub fn acf_finite(
    dist: &LengthDistribution,
    grid: &FreqGrid,
    t: f64,
    tau: f64,
    symbols: SymbolCount,
) -> Result<f64> {
    let curves = acf_finite_surface(dist, grid, &[t], &[tau], symbols)?;
    Ok(curves[0].values[0])
}

/// `R(t, τ)` on a `(t, τ)` grid, one curve over `taus` per entry of `ts`.
///
/// `τ = 0` is accepted; there the expression reduces to `1 - F_{S_{K+1}}(t)`.
pub fn acf_finite_surface(
    dist: &LengthDistribution,
    grid: &FreqGrid,
    ts: &[f64],
    taus: &[f64],
    symbols: SymbolCount,
) -> Result<Vec<AcfCurve>> {
    check_ascending(taus)?;
    if taus.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidArgument("acf_finite takes tau >= 0; use symmetry of R(tau)".into()));
    }
    let max_t = grid.max_usable_t(dist, symbols)?;
    for &t in ts {
        ensure_finite("t", t)?;
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
        }
        if t > max_t {
            return Err(Error::WindowExceeded { t, max_t: max_t.max(0.0) });
        }
    }

    let table = SpectralTable::build(dist, grid.omega_max(), taus);
    let n = grid.n_points();
    let half = n / 2;
    let d_omega = grid.spacing();
    // ∫_0^t e^{jωs} ds for every bin: integrating the band-limited kernel
    // term by term is exact, where sampling g and using a trapezoid is not.
    let weights: Vec<Vec<Complex64>> = ts
        .iter()
        .map(|&t| {
            (0..half)
                .map(|idx| {
                    let omega = idx as f64 * d_omega;
                    if idx == 0 {
                        Complex64::new(t, 0.0)
                    } else {
                        (Complex64::from_polar(1.0, omega * t) - 1.0) / Complex64::new(0.0, omega)
                    }
                })
                .collect()
        })
        .collect();

    let mut integrals = vec![vec![0.0; taus.len()]; ts.len()];
    for (block_idx, block) in taus.chunks(TAU_BLOCK).enumerate() {
        let offset = block_idx * TAU_BLOCK;
        let starts: Vec<usize> = block.iter().map(|&tau| table.first_index_above(tau)).collect();
        let tails: Vec<f64> = starts.iter().map(|&i| table.mass[i..].iter().sum()).collect();

        // spectra[j][n] = G(n·dω; τ_j) for n in 1..half
        let rows = streams::map_indexed(half, |idx| {
            let mut out = vec![Complex64::new(0.0, 0.0); block.len()];
            if idx == 0 {
                return out;
            }
            let omega = idx as f64 * d_omega;
            let mut suffix = vec![Complex64::new(0.0, 0.0); block.len()];
            let mut acc = Complex64::new(0.0, 0.0);
            let mut j = block.len();
            for i in (0..table.nodes.len()).rev() {
                while j > 0 && starts[j - 1] > i {
                    suffix[j - 1] = acc;
                    j -= 1;
                }
                acc += Complex64::from_polar(table.mass[i], -omega * table.nodes[i]);
            }
            while j > 0 {
                suffix[j - 1] = acc;
                j -= 1;
            }
            let factor = geometric_factor(acc, symbols);
            for (k, &tau) in block.iter().enumerate() {
                let q = tails[k] - Complex64::from_polar(1.0, omega * tau) * suffix[k];
                out[k] = factor * q;
            }
            out
        });

        for (k, &tau) in block.iter().enumerate() {
            let dc = kernel_dc_limit(dist, tau, symbols)?;
            for (ti, &t) in ts.iter().enumerate() {
                let oscillating: f64 = (1..half).map(|idx| (rows[idx][k] * weights[ti][idx]).re).sum();
                integrals[ti][offset + k] = d_omega / (2.0 * PI) * (dc * t + 2.0 * oscillating);
            }
        }
    }

    ts.iter()
        .zip(integrals)
        .map(|(&t, ints)| {
            let values = taus
                .iter()
                .zip(ints)
                .map(|(&tau, int)| Ok(dist.survival(t + tau)? + int))
                .collect::<Result<Vec<_>>>()?;
            Ok(AcfCurve { taus: taus.to_vec(), values, kind: AcfKind::FiniteK { t, symbols } })
        })
        .collect()
}
