//! Power spectral density from the stationary autocorrelation, the
//! fixed-length BPSK reference, and occupied bandwidth.
//!
//! Frequencies are two-sided, in cycles per unit time.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::autocorr::{char_fn, AcfCurve, AcfKind};
use crate::error::{ensure_finite, Error, Result};
use crate::output::sig15;
use crate::stopping_time::LengthDistribution;

/// Default lag step for the PSD input curve.
pub const DEFAULT_TAU_STEP: f64 = 0.005;
/// Default lag extent; `R` is negligible beyond it even at 5 dB.
pub const DEFAULT_TAU_MAX: f64 = 40.0;
pub const DEFAULT_FREQ_RESOLUTION: f64 = 1e-3;
pub const DEFAULT_BETA: f64 = 0.05;

const EDGE_LIMIT: f64 = 1e-4;
const IMAG_LIMIT: f64 = 1e-6;
const DUST_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
    pub total_power: f64,
}

impl Spectrum {
    /// From ascending `freqs`; `total_power` is the trapezoid integral.
    pub fn new(freqs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if freqs.len() != values.len() || freqs.len() < 2 {
            return Err(Error::InvalidArgument("spectrum needs >= 2 matching samples".into()));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("frequencies must be strictly ascending".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("spectrum values must be finite".into()));
        }
        let total_power = trapezoid(&freqs, &values);
        Ok(Self { freqs, values, total_power })
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Samples with `|f| ≤ f_max`; `total_power` is kept from the full band.
    pub fn band_limited(&self, f_max: f64) -> Self {
        let (freqs, values) = self
            .freqs
            .iter()
            .zip(&self.values)
            .filter(|(f, _)| f.abs() <= f_max)
            .map(|(&f, &v)| (f, v))
            .unzip();
        Self { freqs, values, total_power: self.total_power }
    }

    /// Columns `f,S`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "f,S")?;
        for (f, s) in self.freqs.iter().zip(&self.values) {
            writeln!(w, "{},{}", sig15(*f), sig15(*s))?;
        }
        Ok(())
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0])).sum()
}

/// `S(f) = ∫ R(τ) e^{-j2πfτ} dτ` for a stationary curve sampled uniformly
/// on `τ = 0, h, 2h, ...`.
///
/// The even extension is transformed with an FFT long enough that the bin
/// spacing is at most `freq_resolution`; the output covers the full
/// `(-1/2h, 1/2h)` band, symmetric about 0.
pub fn psd_from_acf(curve: &AcfCurve, freq_resolution: f64) -> Result<Spectrum> {
    if curve.kind != AcfKind::Limit {
        return Err(Error::InvalidArgument("the PSD is defined for the stationary (limit) ACF".into()));
    }
    ensure_finite("freq_resolution", freq_resolution)?;
    if !(freq_resolution > 0.0) {
        return Err(Error::InvalidArgument(format!("freq_resolution must be positive, got {freq_resolution}")));
    }
    let taus = &curve.taus;
    let r = &curve.values;
    if taus.len() < 2 || taus.len() != r.len() {
        return Err(Error::InvalidArgument("ACF curve needs >= 2 samples".into()));
    }
    if taus[0] != 0.0 {
        return Err(Error::InvalidArgument("ACF curve must start at tau = 0".into()));
    }
    let h = taus[1];
    let uniform = taus.iter().enumerate().all(|(i, &t)| (t - i as f64 * h).abs() <= 1e-9 * h.max(t));
    if !(h > 0.0) || !uniform {
        return Err(Error::InvalidArgument("ACF curve must be on a uniform tau grid".into()));
    }
    let edge = *r.last().expect("non-empty");
    if edge.abs() > EDGE_LIMIT {
        return Err(Error::Truncation { edge, tau: *taus.last().expect("non-empty") });
    }

    let m = r.len();
    let n = ((1.0 / (freq_resolution * h)).ceil() as usize).max(2 * m).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(r[0], 0.0);
    for i in 1..m {
        buf[i] = Complex64::new(r[i], 0.0);
        buf[n - i] = buf[i];
    }
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);

    let peak = buf.iter().map(|z| (h * z.re).abs()).fold(0.0, f64::max);
    let imag = buf.iter().map(|z| (h * z.im).abs()).fold(0.0, f64::max);
    if imag > IMAG_LIMIT * peak {
        return Err(Error::Consistency(format!("imaginary residue {imag:e} exceeds 1e-6 of the peak")));
    }
    let df = 1.0 / (n as f64 * h);
    let half = n / 2;
    let mut freqs = Vec::with_capacity(n - 1);
    let mut values = Vec::with_capacity(n - 1);
    for k in -(half as isize - 1)..(half as isize) {
        let idx = k.unsigned_abs();
        // Average the mirrored bins so the result is exactly even.
        let s = 0.5 * h * (buf[idx].re + buf[(n - idx) % n].re);
        let s = if s < 0.0 {
            if s < -DUST_LIMIT * peak {
                return Err(Error::Consistency(format!("PSD is negative ({s:e}) at f = {}", k as f64 * df)));
            }
            0.0
        } else {
            s
        };
        freqs.push(k as f64 * df);
        values.push(s);
    }
    Spectrum::new(freqs, values)
}

/// `S(f) = T·sinc²(fT)` for fixed symbols of length `T`.
pub fn fixed_bpsk_reference(symbol_time: f64, freqs: &[f64]) -> Result<Spectrum> {
    ensure_finite("symbol_time", symbol_time)?;
    if !(symbol_time > 0.0) {
        return Err(Error::InvalidArgument(format!("symbol_time must be positive, got {symbol_time}")));
    }
    let values = freqs
        .iter()
        .map(|&f| {
            let x = PI * f * symbol_time;
            if x == 0.0 {
                symbol_time
            } else {
                symbol_time * (x.sin() / x).powi(2)
            }
        })
        .collect();
    Spectrum::new(freqs.to_vec(), values)
}

/// `R(τ) = max(0, 1 - |τ|/T)`: the stationary ACF of fixed length-`T` symbols.
pub fn triangle_acf(symbol_time: f64, taus: &[f64]) -> AcfCurve {
    let values = taus.iter().map(|&t| (1.0 - t.abs() / symbol_time).max(0.0)).collect();
    AcfCurve { taus: taus.to_vec(), values, kind: AcfKind::Limit }
}

/// Closed form of the stationary PSD, `(1 - Re Φ(2πf)) / (2π² f² E{T})`,
/// with `S(0) = E{T²}/E{T}`.
pub fn psd_closed_form(dist: &LengthDistribution, f: f64) -> Result<f64> {
    ensure_finite("f", f)?;
    if f == 0.0 {
        return Ok(dist.moment(2)? / dist.mean());
    }
    let phi = char_fn(dist, 2.0 * PI * f)?;
    Ok((1.0 - phi.re) / (2.0 * PI * PI * f * f * dist.mean()))
}

/// Width `f_U - f_L` outside which `β/2` of the power lies on each side.
pub fn occupied_bandwidth(s: &Spectrum, beta: f64) -> Result<f64> {
    ensure_finite("beta", beta)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, 1), got {beta}")));
    }
    let n = s.freqs.len();
    let mut cum = Vec::with_capacity(n);
    cum.push(0.0);
    for i in 1..n {
        let step = 0.5 * (s.values[i - 1] + s.values[i]) * (s.freqs[i] - s.freqs[i - 1]);
        cum.push(cum[i - 1] + step);
    }
    let total = cum[n - 1];
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("spectrum carries no power".into()));
    }
    let lo = crossing(&s.freqs, &cum, 0.5 * beta * total)?;
    let hi = crossing(&s.freqs, &cum, (1.0 - 0.5 * beta) * total)?;
    Ok(hi - lo)
}

fn crossing(freqs: &[f64], cum: &[f64], level: f64) -> Result<f64> {
    let i = cum.partition_point(|&c| c < level);
    if i == 0 || i == 1 || i >= cum.len() - 1 {
        return Err(Error::Resolution(format!(
            "frequency grid too coarse or too narrow to bracket the {level:e} power level"
        )));
    }
    let (c0, c1) = (cum[i - 1], cum[i]);
    let frac = if c1 > c0 { (level - c0) / (c1 - c0) } else { 0.0 };
    Ok(freqs[i - 1] + frac * (freqs[i] - freqs[i - 1]))
}
