use qzeno::analysis::{
    analyse, classify_peak, im_eigenvalue_surface, pole_peak, trace_ep_locus, LocusParameter, PeakClassifierConfig,
};
use qzeno::markovian::{eigensystem, markovian_ep_condition};
use qzeno::model::{DecayCurve, PeakClass, SpectralDensity, SystemConfig};

fn markovian(eps: f64) -> (SystemConfig, SpectralDensity) {
    (SystemConfig::new(1.0, eps), SpectralDensity::Markovian { gamma_tilde: 1.0 })
}

fn lorentzian(eps: f64, gamma: f64) -> (SystemConfig, SpectralDensity) {
    (SystemConfig::new(1.0, eps), SpectralDensity::Lorentzian { g: 1.0, gamma, delta_c: 0.0 })
}

#[test]
fn markovian_sweep_finds_the_ep() {
    let (sys, d) = markovian(0.0);
    let (_, r) = analyse(&sys, &d, &PeakClassifierConfig::default()).unwrap();
    let want = markovian_ep_condition(0.0).unwrap();
    assert_eq!(r.classification, PeakClass::SharpPeak);
    assert!((r.peak_coupling - want).abs() <= r.grid_resolution, "{r:?}");
    assert!((r.cross_check.unwrap() - want).abs() < 1e-6);
    assert!(markovian_ep_condition(0.5).is_none());
}

#[test]
fn lorentzian_peak_sits_on_the_pole_maximiser() {
    for eps in [0.0, 1.0, 3.0] {
        let (sys, d) = lorentzian(eps, 0.5);
        let (_, r) = analyse(&sys, &d, &PeakClassifierConfig::default()).unwrap();
        assert_eq!(r.classification, PeakClass::SharpPeak, "ε = {eps}");
        assert!((r.peak_coupling - r.cross_check.unwrap()).abs() <= r.grid_resolution, "{r:?}");
    }
}

#[test]
fn halving_the_step_keeps_the_class() {
    let cases = [markovian(0.0), markovian(2.0), lorentzian(0.0, 0.5), lorentzian(1.0, 2.0)];
    for (sys, d) in cases {
        let coarse = PeakClassifierConfig::default();
        let fine = PeakClassifierConfig {
            coarse_points: 2 * coarse.coarse_points - 1,
            ..coarse.clone()
        };
        let (_, a) = analyse(&sys, &d, &coarse).unwrap();
        let (_, b) = analyse(&sys, &d, &fine).unwrap();
        assert!(b.grid_resolution < a.grid_resolution);
        assert_eq!(a.classification, b.classification, "{d:?} ε = {}", sys.epsilon);
    }
}

#[test]
fn locus_rises_with_the_width() {
    let (sys, d) = lorentzian(0.0, 0.5);
    let values = [0.1, 0.5, 1.0, 2.0];
    let locus =
        trace_ep_locus(&sys, &d, LocusParameter::LorentzianWidth, &values, &PeakClassifierConfig::default()).unwrap();
    assert_eq!(locus.gaps, 0);
    assert!(locus.increasing, "{locus:?}");
    for (p, &w) in locus.points.iter().zip(&values) {
        let exact = pole_peak(&sys, &SpectralDensity::Lorentzian { g: 1.0, gamma: w, delta_c: 0.0 }, 1.0, 2.0).unwrap();
        assert!((p.g_ep - exact).abs() <= p.err, "γ = {w}");
    }
}

#[test]
fn locus_over_a_missing_parameter_is_refused() {
    let (sys, _) = markovian(0.0);
    let d = SpectralDensity::Ohmic { g: 1.0, s: 2.0, omega_c: 1.0, omega_eg: 6.0 };
    assert!(trace_ep_locus(&sys, &d, LocusParameter::LorentzianWidth, &[1.0], &PeakClassifierConfig::default()).is_err());
    assert!(pole_peak(&sys, &d, 0.5, 3.0).is_err());
}

#[test]
fn classifier_shapes() {
    let x: Vec<f64> = (0..81).map(|k| k as f64 * 0.1).collect();
    let cfg = PeakClassifierConfig::default();
    let class = |y: Vec<f64>| classify_peak(&DecayCurve::new(x.clone(), y, 1.0), &cfg).unwrap().classification;
    assert_eq!(class(x.iter().map(|v| 4.0 - (v - 4.0).abs()).collect()), PeakClass::SharpPeak);
    assert_eq!(class(x.iter().map(|v| 4.0 - (v - 4.0).powi(2)).collect()), PeakClass::SmoothPeak);
    assert_eq!(class(x.iter().map(|v| (-v).exp()).collect()), PeakClass::MonotoneDecreasing);
    assert_eq!(class(x.iter().map(|v| v * v).collect()), PeakClass::NoPeak);
}

#[test]
fn eigen_surface_coalesces_only_on_resonance() {
    let gammas: Vec<f64> = (0..=80).map(|k| k as f64 * 0.1).collect();
    let surface = im_eigenvalue_surface(&SystemConfig::new(1.0, 0.0), &gammas, &[0.0, -2.0]).unwrap();
    for p in surface {
        if p.gamma_tilde == 0.0 {
            assert_eq!((p.lambda3.im, p.lambda4.im), (0.0, 0.0));
        } else if p.epsilon == 0.0 {
            assert_eq!(p.coalesced, p.gamma_tilde <= 4.0, "γ̃ = {}", p.gamma_tilde);
            if p.gamma_tilde < 4.0 {
                assert!((p.lambda3.im + p.gamma_tilde / 4.0).abs() < 1e-12);
            } else {
                // Split symmetrically about −γ̃/4.
                let mid = 0.5 * (p.lambda3.im + p.lambda4.im);
                assert!((mid + p.gamma_tilde / 4.0).abs() < 1e-12);
            }
        } else {
            assert!(!p.coalesced);
        }
    }
    let e = eigensystem(&SystemConfig::new(1.0, 0.0), 8.0);
    assert!((e.lambda3.im - e.lambda4.im).abs() > 1.0);
}
