//! Browser bindings: length density, stationary autocorrelation and PSD with
//! occupied bandwidth, each for a given Eb/N0 with E{T} = 1.

use varlen_spectrum::autocorr::acf_limit_curve;
use varlen_spectrum::spectrum::{self, DEFAULT_FREQ_RESOLUTION, DEFAULT_TAU_MAX, DEFAULT_TAU_STEP};
use varlen_spectrum::stopping_time::db_to_ratio;
use varlen_spectrum::{calibrate_threshold, LengthDistribution};
use wasm_bindgen::prelude::*;

/// Paired samples for plotting; `reference` is the fixed-length curve when
/// there is one (empty otherwise).
#[wasm_bindgen]
pub struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
    reference: Vec<f64>,
    threshold_l: f64,
    obw: f64,
    reference_obw: f64,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn y(&self) -> Vec<f64> {
        self.y.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn reference(&self) -> Vec<f64> {
        self.reference.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn threshold_l(&self) -> f64 {
        self.threshold_l
    }

    /// Occupied bandwidth at β = 0.05 (NaN for non-spectrum curves).
    #[wasm_bindgen(getter)]
    pub fn obw(&self) -> f64 {
        self.obw
    }

    #[wasm_bindgen(getter)]
    pub fn reference_obw(&self) -> f64 {
        self.reference_obw
    }
}

fn distribution(gamma_db: f64) -> Result<LengthDistribution, JsError> {
    if !gamma_db.is_finite() {
        return Err(JsError::new("Eb/N0 must be finite"));
    }
    let params = calibrate_threshold(db_to_ratio(gamma_db), 1.0)?;
    Ok(LengthDistribution::exact(params)?)
}

fn grid(max: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points).map(|i| max * i as f64 / (points - 1) as f64).collect()
}

/// Symbol-length density on `[0, support]`.
#[wasm_bindgen]
pub fn length_pdf(gamma_db: f64, points: usize) -> Result<Curve, JsError> {
    let dist = distribution(gamma_db)?;
    let x = grid(dist.upper_support(), points);
    let y = x.iter().map(|&t| dist.pdf(t)).collect::<Result<Vec<_>, _>>()?;
    Ok(Curve {
        x,
        y,
        reference: Vec::new(),
        threshold_l: dist.params().threshold_l(),
        obw: f64::NAN,
        reference_obw: f64::NAN,
    })
}

/// Stationary autocorrelation on `[0, tau_max]`, with the fixed-length triangle.
#[wasm_bindgen]
pub fn stationary_acf(gamma_db: f64, tau_max: f64, points: usize) -> Result<Curve, JsError> {
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(JsError::new("tau_max must be positive"));
    }
    let dist = distribution(gamma_db)?;
    let taus = grid(tau_max, points);
    let curve = acf_limit_curve(&dist, &taus)?;
    Ok(Curve {
        reference: spectrum::triangle_acf(1.0, &taus).values,
        x: taus,
        y: curve.values,
        threshold_l: dist.params().threshold_l(),
        obw: f64::NAN,
        reference_obw: f64::NAN,
    })
}

/// PSD on `|f| ≤ f_max` with both occupied bandwidths at β = 0.05.
#[wasm_bindgen]
pub fn power_spectrum(gamma_db: f64, f_max: f64) -> Result<Curve, JsError> {
    if !(f_max > 0.0 && f_max.is_finite()) {
        return Err(JsError::new("f_max must be positive"));
    }
    let dist = distribution(gamma_db)?;
    let n = (DEFAULT_TAU_MAX / DEFAULT_TAU_STEP).round() as usize;
    let taus: Vec<f64> = (0..=n).map(|i| i as f64 * DEFAULT_TAU_STEP).collect();
    let s = spectrum::psd_from_acf(&acf_limit_curve(&dist, &taus)?, DEFAULT_FREQ_RESOLUTION)?;
    let r = spectrum::psd_from_acf(&spectrum::triangle_acf(1.0, &taus), DEFAULT_FREQ_RESOLUTION)?;
    let obw = spectrum::occupied_bandwidth(&s, spectrum::DEFAULT_BETA)?;
    let reference_obw = spectrum::occupied_bandwidth(&r, spectrum::DEFAULT_BETA)?;
    let s = s.band_limited(f_max);
    let r = r.band_limited(f_max);
    Ok(Curve {
        x: s.freqs,
        y: s.values,
        reference: r.values,
        threshold_l: dist.params().threshold_l(),
        obw,
        reference_obw,
    })
}
