mod common;

use common::{calibrated, simpson};
use proptest::prelude::*;
use varlen_spectrum::stats::KsReport;
use varlen_spectrum::stopping_time::{approx_pdf, db_to_ratio, exact_pdf, CdfTable};
use varlen_spectrum::{calibrate_threshold, ChannelParams, Error, Form, LengthDistribution};

#[test]
fn density_vanishes_for_nonpositive_time() {
    let d = calibrated(10.0);
    assert_eq!(d.pdf(-0.5).unwrap(), 0.0);
    assert_eq!(d.pdf(0.0).unwrap(), 0.0);
    assert!(matches!(d.pdf(f64::NAN), Err(Error::InvalidArgument(_))));
    assert!(d.cdf(f64::INFINITY).is_err());
}

#[test]
fn density_integrates_to_one() {
    for db in [5.0, 10.0, 15.0] {
        let d = calibrated(db);
        let total = simpson(|t| d.pdf(t).unwrap(), 0.0, d.upper_support(), 200_000);
        assert!((total - 1.0).abs() < 1e-6, "{db} dB: {total}");
    }
}

#[test]
fn calibration_hits_unit_mean() {
    for db in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let d = calibrated(db);
        assert!((d.moment(1).unwrap() - 1.0).abs() < 1e-6, "{db} dB");
        assert!((d.params().mean_t() - 1.0).abs() < 1e-6);
        assert!((d.params().eb_over_n0() - db_to_ratio(db)).abs() < 1e-9 * db_to_ratio(db));
    }
}

#[test]
fn calibrated_threshold_near_four_gamma() {
    let gamma = db_to_ratio(15.0);
    let l = calibrate_threshold(gamma, 1.0).unwrap().threshold_l();
    assert!((l / (4.0 * gamma) - 1.0).abs() < 0.1, "L = {l}");
}

#[test]
fn threshold_grows_with_snr() {
    let ls: Vec<f64> = [2.0, 5.0, 10.0, 40.0]
        .iter()
        .map(|&g| calibrate_threshold(g, 1.0).unwrap().threshold_l())
        .collect();
    assert!(ls.windows(2).all(|w| w[0] < w[1]), "{ls:?}");
}

#[test]
fn calibration_reports_window_on_failure() {
    match calibrate_threshold(1.0, 1e-12) {
        Err(Error::CalibrationFailure { target, lo, hi }) => {
            assert_eq!((target, lo), (1e-12, 1e-3));
            assert!(hi < lo);
        }
        other => panic!("expected calibration failure, got {other:?}"),
    }
    assert!(calibrate_threshold(-1.0, 1.0).is_err());
    assert!(calibrate_threshold(1.0, 0.0).is_err());
}

#[test]
fn mean_of_two_boundary_law_matches_closed_form() {
    // E{T} = (L/4γ) tanh(L/2) for the two-sided exit time; the library
    // integrates it numerically instead.
    for (g, l) in [(1.0, 0.5), (1.0, 3.0), (4.0, 10.0), (10.0, 40.0)] {
        let p = ChannelParams::new(g, l).unwrap();
        let expect = l / (4.0 * g) * (0.5 * l).tanh();
        assert!((p.mean_t() - expect).abs() < 1e-7 * expect, "gamma={g} L={l}");
    }
}

#[test]
fn second_moment_limits() {
    let d = calibrated(30.0);
    assert!((d.moment(2).unwrap() - 1.0).abs() < 1e-2);
    let d = calibrated(5.0);
    assert!(d.moment(2).unwrap() >= d.moment(1).unwrap().powi(2));
    assert!(matches!(d.moment(3), Err(Error::Unsupported(_))));
    assert!(matches!(d.moment(0), Err(Error::Unsupported(_))));
}

#[test]
fn cdf_endpoints_and_order() {
    let d = calibrated(10.0);
    assert_eq!(d.cdf(0.0).unwrap(), 0.0);
    assert!(d.cdf(d.upper_support()).unwrap() >= 1.0 - 1e-6);
    assert!(d.cdf(0.8).unwrap() <= d.cdf(1.2).unwrap());
    let s = d.survival(0.9).unwrap();
    assert!((s + d.cdf(0.9).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn cdf_derivative_is_density() {
    for db in [5.0, 10.0, 15.0] {
        let d = calibrated(db);
        let h = 1e-5;
        for i in 1..=50 {
            let t = d.upper_support() * i as f64 / 52.0;
            let fd = (d.cdf(t + h).unwrap() - d.cdf(t - h).unwrap()) / (2.0 * h);
            assert!((fd - d.pdf(t).unwrap()).abs() < 1e-4, "{db} dB, t={t}");
        }
    }
}

#[test]
fn upper_support_leaves_tiny_tail() {
    for db in [5.0, 10.0, 15.0] {
        let d = calibrated(db);
        assert!(d.survival(d.upper_support()).unwrap() < 1e-9 * 1.01);
        assert!(d.survival(0.9 * d.upper_support()).unwrap() > 0.0);
    }
}

#[test]
fn extra_series_terms_change_nothing() {
    let p = calibrate_threshold(db_to_ratio(10.0), 1.0).unwrap();
    let base = LengthDistribution::with_options(p, Form::ExactSeries, 10, 1e-8).unwrap();
    let more = LengthDistribution::with_options(p, Form::ExactSeries, 14, 1e-8).unwrap();
    for i in 1..=60 {
        let t = 0.05 * i as f64;
        assert!((base.pdf(t).unwrap() - more.pdf(t).unwrap()).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn exact_and_approximate_agree_at_ten_db() {
    let p = calibrate_threshold(db_to_ratio(10.0), 1.0).unwrap();
    let exact = LengthDistribution::exact(p).unwrap();
    let approx = LengthDistribution::new(p, Form::LargeLApprox).unwrap();
    let peak = (0..=1000).map(|i| exact.pdf(0.5 + i as f64 * 1e-3).unwrap()).fold(0.0, f64::max);
    for i in 0..=1000 {
        let t = 0.5 + i as f64 * 1e-3;
        let gap = (exact.pdf(t).unwrap() - approx.pdf(t).unwrap()).abs();
        assert!(gap / peak < 1e-2, "t={t}");
    }
}

#[test]
fn sampling_contract() {
    let d = calibrated(10.0);
    assert!(d.sample_lengths(0, 1).unwrap().is_empty());
    let a = d.sample_lengths(1000, 42).unwrap();
    assert_eq!(a, d.sample_lengths(1000, 42).unwrap());
    assert_ne!(a, d.sample_lengths(1000, 43).unwrap());
    assert!(a.iter().all(|&t| t > 0.0 && t <= d.upper_support()));
    let approx = LengthDistribution::new(*d.params(), Form::LargeLApprox).unwrap();
    assert!(approx.sample_lengths(10, 1).is_err());
}

#[test]
fn samples_follow_the_law() {
    let d = calibrated(10.0);
    let mut xs = d.sample_lengths(100_000, 2024).unwrap();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - 1.0).abs() < 3.0 * sd / n.sqrt(), "mean {mean}");
    xs.sort_by(f64::total_cmp);
    let ks = KsReport::from_cdf(&d.cdf_sorted(&xs).unwrap(), 0.01);
    assert!(ks.pass, "{ks:?}");
}

#[test]
fn non_monotone_table_rejected() {
    let r = CdfTable::from_knots(vec![0.0, 1.0, 2.0], vec![0.0, 0.6, 0.4]);
    assert!(matches!(r, Err(Error::Consistency(_))));
    let r = CdfTable::from_knots(vec![0.0, 2.0, 1.0], vec![0.0, 0.5, 1.0]);
    assert!(matches!(r, Err(Error::Consistency(_))));
}

#[test]
fn table_quantiles_invert_cdf() {
    let d = calibrated(15.0);
    let table = d.cdf_table().unwrap();
    for u in [0.01, 0.25, 0.5, 0.75, 0.99] {
        let t = table.quantile(u);
        assert!((d.cdf(t).unwrap() - u).abs() < 2e-4, "u={u}");
    }
}

fn random_law() -> impl Strategy<Value = (f64, f64)> {
    // (gamma, L) pairs spanning low and high thresholds.
    (0.5f64..200.0, 0.2f64..300.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn density_nonnegative_beyond_dust((g, l) in random_law(), u in 0.0f64..1.0) {
        let m = l / (4.0 * g) * (0.5 * l).tanh();
        let t = m * 6.0 * u;
        let v = exact_pdf(g, l, t, 10);
        prop_assert!(v.is_finite());
        prop_assert!(v >= -1e-8);
    }

    #[test]
    fn representations_meet_continuously((g, l) in random_law()) {
        // The two series forms hand over at L²/(16γt) = π/4.
        let t = l * l / (4.0 * std::f64::consts::PI * g);
        let below = exact_pdf(g, l, t * (1.0 - 1e-12), 10);
        let above = exact_pdf(g, l, t * (1.0 + 1e-12), 10);
        let scale = below.abs().max(above.abs());
        prop_assume!(scale > 1e-280);
        prop_assert!((below - above).abs() <= 1e-8 * scale, "{below} vs {above}");
    }

    #[test]
    fn approximation_tracks_exact_near_mode(l in 20.0f64..300.0, g in 1.0f64..500.0, z in -1.0f64..1.0) {
        let m = l / (4.0 * g);
        let s = (l / (8.0 * g * g)).sqrt();
        let t = (m * (1.0 - 1.5 * (s / m).powi(2)).max(0.2) + 0.5 * z * s).max(1e-3 * m);
        let e = exact_pdf(g, l, t, 10);
        let a = approx_pdf(g, l, t);
        prop_assert!((e - a).abs() <= 1e-2 * e, "t={t}: {e} vs {a}");
    }

    #[test]
    fn cdf_is_monotone(a in 0.0f64..3.5, b in 0.0f64..3.5) {
        let d = calibrated(10.0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(d.cdf(lo).unwrap() <= d.cdf(hi).unwrap());
    }
}
