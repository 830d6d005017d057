//! Path-simulation oracle for the symbol-length law.
//!
//! The receiver's cumulative LLR for a `+1` symbol is simulated directly as
//! `dX = 4γ dt + sqrt(8γ) dW`, absorbed at `±L`. Matching the large-threshold
//! density `L/sqrt(16πγt³)·exp(-(L-4γt)²/(16γt))` to the first-passage law of
//! Brownian motion with drift `μ` and variance `σ²`,
//! `L/sqrt(2πσ²t³)·exp(-(L-μt)²/(2σ²t))`, forces `σ² = 8γ` and `μ = 4γ`.
//! With those, `θμ + θ²σ²/2 = 0` at `θ = -1`, so `e^{-X}` is a martingale and
//! optional stopping gives `P(exit at -L) = 1/(1+e^L)`.
//!
//! Between grid points the path is a Brownian bridge; a crossing that the
//! grid misses is detected with the bridge exit probability
//! `exp(-2(L-x₀)(L-x₁)/(σ²Δt))` so discrete monitoring does not bias `T`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{mean_and_std_error, KsReport};
use crate::stopping_time::{ChannelParams, LengthDistribution};
use crate::streams;

const CHUNK: usize = 2048;
const MAX_CENSORED_FRACTION: f64 = 1e-3;
/// Time step as a fraction of `E{T}`.
pub const DEFAULT_DT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerConfig {
    params: ChannelParams,
    dt: f64,
    max_steps: usize,
}

impl WienerConfig {
    /// Requires `dt ≤ 1e-3·E{T}`.
    pub fn new(params: ChannelParams, dt: f64, max_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if dt > DEFAULT_DT_FRACTION * params.mean_t() * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "dt = {dt} exceeds 1e-3·E{{T}} = {}",
                DEFAULT_DT_FRACTION * params.mean_t()
            )));
        }
        if max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be positive".into()));
        }
        Ok(Self { params, dt, max_steps })
    }

    /// `dt = 1e-3·E{T}` and a step cap covering four times the support.
    pub fn for_distribution(dist: &LengthDistribution) -> Self {
        let params = *dist.params();
        let dt = DEFAULT_DT_FRACTION * params.mean_t();
        let max_steps = (4.0 * dist.upper_support() / dt).ceil() as usize;
        Self { params, dt, max_steps }
    }

    pub fn with_dt(self, dt: f64) -> Result<Self> {
        let horizon = self.dt * self.max_steps as f64;
        Self::new(self.params, dt, (horizon / dt).ceil() as usize)
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn drift(&self) -> f64 {
        4.0 * self.params.gamma()
    }

    pub fn variance_rate(&self) -> f64 {
        8.0 * self.params.gamma()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Passage {
    pub time: f64,
    /// The `+L` boundary (the transmitted sign's) was reached.
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstPassageRun {
    pub passages: Vec<Passage>,
    /// Trials that reached `max_steps` without absorption (excluded from `passages`).
    pub censored: usize,
}

impl FirstPassageRun {
    pub fn times(&self) -> Vec<f64> {
        self.passages.iter().map(|p| p.time).collect()
    }

    pub fn error_rate(&self) -> f64 {
        let wrong = self.passages.iter().filter(|p| !p.correct).count();
        wrong as f64 / self.passages.len().max(1) as f64
    }
}

/// Advances one Euler step from `x` at time `t0` with standard normal `z`.
/// `uniform` is drawn only when the bridge could have touched a boundary.
fn step(cfg: &WienerConfig, x: &mut f64, t0: f64, z: f64, uniform: impl FnOnce() -> f64) -> Option<Passage> {
    let l = cfg.params.threshold_l();
    let dt = cfg.dt;
    let step_var = cfg.variance_rate() * dt;
    let next = *x + cfg.drift() * dt + step_var.sqrt() * z;
    if next >= l {
        let frac = (l - *x) / (next - *x);
        return Some(Passage { time: t0 + frac * dt, correct: true });
    }
    if next <= -l {
        let frac = (*x + l) / (*x - next);
        return Some(Passage { time: t0 + frac * dt, correct: false });
    }
    let up = 2.0 * (l - *x) * (l - next) / step_var;
    let down = 2.0 * (l + *x) * (l + next) / step_var;
    if up < 40.0 || down < 40.0 {
        let p_up = (-up).exp();
        let p_down = (-down).exp();
        let u = uniform();
        if u < p_up {
            return Some(Passage { time: t0 + 0.5 * dt, correct: true });
        }
        if u < p_up + p_down {
            return Some(Passage { time: t0 + 0.5 * dt, correct: false });
        }
    }
    *x = next;
    None
}

fn simulate_trial<R: Rng + ?Sized>(cfg: &WienerConfig, rng: &mut R) -> Option<Passage> {
    let mut x = 0.0f64;
    for k in 0..cfg.max_steps {
        let z: f64 = rng.sample(StandardNormal);
        if let Some(p) = step(cfg, &mut x, k as f64 * cfg.dt, z, || rng.random()) {
            return Some(p);
        }
    }
    None
}

/// One trial at `dt` and at `dt/2` driven by the same Brownian path: the
/// coarse increments are sums of consecutive fine increments.
fn coupled_trial<R: Rng + ?Sized>(
    coarse: &WienerConfig,
    fine: &WienerConfig,
    rng: &mut R,
) -> (Option<Passage>, Option<Passage>) {
    let (mut xc, mut xf) = (0.0f64, 0.0f64);
    let (mut pc, mut pf) = (None, None);
    for k in 0..coarse.max_steps {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        if pf.is_none() {
            pf = step(fine, &mut xf, (2 * k) as f64 * fine.dt, z1, || rng.random());
        }
        if pf.is_none() {
            pf = step(fine, &mut xf, (2 * k + 1) as f64 * fine.dt, z2, || rng.random());
        }
        if pc.is_none() {
            let z = (z1 + z2) * std::f64::consts::FRAC_1_SQRT_2;
            pc = step(coarse, &mut xc, k as f64 * coarse.dt, z, || rng.random());
        }
        if pc.is_some() && pf.is_some() {
            break;
        }
    }
    (pc, pf)
}

/// Simulates `n` symbols. Trials run in fixed chunks with per-chunk seeds
/// derived from `(seed, chunk)`, so the output is independent of threading.
pub fn first_passage(config: &WienerConfig, n: usize, seed: u64) -> Result<FirstPassageRun> {
    let chunks = n.div_ceil(CHUNK);
    let results = streams::map_indexed(chunks, |c| {
        let mut rng = streams::stream(seed, c as u64);
        let size = CHUNK.min(n - c * CHUNK);
        (0..size).map(|_| simulate_trial(config, &mut rng)).collect::<Vec<_>>()
    });
    collect_run(results.into_iter().flatten().collect(), n)
}

/// Runs `n` trials at `config.dt()` and at half that step on shared Brownian
/// paths, so the difference between the two runs is discretization error
/// rather than sampling noise. Returns `(coarse, fine)`.
pub fn coupled_refinement(config: &WienerConfig, n: usize, seed: u64) -> Result<(FirstPassageRun, FirstPassageRun)> {
    let fine = WienerConfig { dt: 0.5 * config.dt, max_steps: 2 * config.max_steps, ..*config };
    let chunks = n.div_ceil(CHUNK);
    let results = streams::map_indexed(chunks, |c| {
        let mut rng = streams::stream(seed, c as u64);
        let size = CHUNK.min(n - c * CHUNK);
        (0..size).map(|_| coupled_trial(config, &fine, &mut rng)).collect::<Vec<_>>()
    });
    let (coarse, fine): (Vec<_>, Vec<_>) = results.into_iter().flatten().unzip();
    Ok((collect_run(coarse, n)?, collect_run(fine, n)?))
}

fn collect_run(trials: Vec<Option<Passage>>, n: usize) -> Result<FirstPassageRun> {
    let mut passages = Vec::with_capacity(trials.len());
    let mut censored = 0;
    for p in trials {
        match p {
            Some(p) => passages.push(p),
            None => censored += 1,
        }
    }
    if n > 0 && censored as f64 > MAX_CENSORED_FRACTION * n as f64 {
        return Err(Error::Censored { censored, total: n });
    }
    Ok(FirstPassageRun { passages, censored })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityValidation {
    pub ks: KsReport,
    pub mean_t_empirical: f64,
    pub mean_t_std_error: f64,
    pub mean_t_analytic: f64,
    pub error_rate: f64,
    pub predicted_error_rate: f64,
    pub error_rate_std_error: f64,
    pub censored: usize,
}

/// KS comparison of path-simulated stopping times against `dist.cdf` at 1%.
pub fn validate_density(
    config: &WienerConfig,
    dist: &LengthDistribution,
    n: usize,
    seed: u64,
) -> Result<DensityValidation> {
    if config.params() != dist.params() {
        return Err(Error::InvalidArgument(
            "path simulation and distribution use different channel parameters".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InsufficientSamples("validation needs n > 0 trials".into()));
    }
    let run = first_passage(config, n, seed)?;
    let mut times = run.times();
    if times.is_empty() {
        return Err(Error::InsufficientSamples("every trial was censored".into()));
    }
    let (mean, se) = mean_and_std_error(&times);
    times.sort_by(f64::total_cmp);
    let cdf = dist.cdf_sorted(&times)?;
    let ks = KsReport::from_cdf(&cdf, 0.01);
    let predicted = dist.params().wrong_boundary_probability();
    let m = run.passages.len() as f64;
    Ok(DensityValidation {
        ks,
        mean_t_empirical: mean,
        mean_t_std_error: se,
        mean_t_analytic: dist.mean(),
        error_rate: run.error_rate(),
        predicted_error_rate: predicted,
        error_rate_std_error: (predicted * (1.0 - predicted) / m).sqrt(),
        censored: run.censored,
    })
}
