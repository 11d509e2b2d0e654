use num_complex::Complex64;
use proptest::prelude::*;
use qzeno::analysis::effective_decay_rate;
use qzeno::laplace::{build_amplitude, invert, InversionEngine};
use qzeno::markovian::c1_closed_form;
use qzeno::model::{AmplitudeTrace, SpectralDensity, SystemConfig, TimeGrid};
use qzeno::timedomain::{discretize_bath, solve_discretized_run, solve_volterra, DiscretizationStrategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sup_p1(a: &AmplitudeTrace, b: &AmplitudeTrace) -> f64 {
    a.p1.iter().zip(&b.p1).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn both(sys: &SystemConfig, d: &SpectralDensity, grid: &TimeGrid) -> (AmplitudeTrace, AmplitudeTrace) {
    let f = build_amplitude(sys, d).unwrap();
    (
        invert(&f, grid, InversionEngine::Talbot).unwrap(),
        invert(&f, grid, InversionEngine::FourierSeries).unwrap(),
    )
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.random_range(-1.0..1.0))
}

#[test]
fn talbot_and_fourier_agree_on_rational_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let grid = TimeGrid::uniform(0.0, 20.0, 201).unwrap();
    let mut worst = (0.0, String::new());
    for k in 0..50 {
        let eps = log_uniform(&mut rng);
        let d = if k % 5 == 0 {
            SpectralDensity::Markovian { gamma_tilde: log_uniform(&mut rng) }
        } else {
            SpectralDensity::Lorentzian {
                g: log_uniform(&mut rng),
                gamma: log_uniform(&mut rng),
                delta_c: log_uniform(&mut rng),
            }
        };
        let (t, f) = both(&SystemConfig::new(1.0, eps), &d, &grid);
        let diff = sup_p1(&t, &f);
        if diff > worst.0 {
            worst = (diff, format!("{d:?}, ε = {eps}"));
        }
    }
    assert!(worst.0 <= 1e-6, "{worst:?}");
}

#[test]
fn talbot_and_fourier_agree_on_ohmic_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let grid = TimeGrid::uniform(0.0, 60.0, 121).unwrap();
    for _ in 0..16 {
        let s = [0.5, 1.0, 2.0, 3.0][rng.random_range(0..4)];
        let omega_c = [0.5, 1.0, 3.0][rng.random_range(0..3)];
        let g = [0.3, 1.0, 3.0][rng.random_range(0..3)];
        let eps = [-2.0, 0.0, 1.5][rng.random_range(0..3)];
        let d = SpectralDensity::Ohmic { g, s, omega_c, omega_eg: 6.0 };
        let (t, f) = both(&SystemConfig::new(1.0, eps), &d, &grid);
        let diff = sup_p1(&t, &f);
        assert!(diff <= 1e-6, "{d:?}, ε = {eps}: {diff:e}");
    }
}

#[test]
fn volterra_matches_laplace() {
    let grid = TimeGrid::uniform(0.0, 20.0, 101).unwrap();
    for (eps, d) in [
        (0.0, SpectralDensity::Lorentzian { g: 1.0, gamma: 0.5, delta_c: 0.0 }),
        (1.0, SpectralDensity::Lorentzian { g: 2.0, gamma: 3.0, delta_c: -1.0 }),
        (0.0, SpectralDensity::Ohmic { g: 1.0, s: 2.0, omega_c: 1.0, omega_eg: 6.0 }),
        (0.5, SpectralDensity::Ohmic { g: 0.5, s: 1.0, omega_c: 3.0, omega_eg: 6.0 }),
    ] {
        let sys = SystemConfig::new(1.0, eps);
        let f = build_amplitude(&sys, &d).unwrap();
        let laplace = invert(&f, &grid, InversionEngine::FourierSeries).unwrap();
        let v = solve_volterra(&sys, &d, &grid).unwrap();
        let diff = sup_p1(&laplace, &v);
        assert!(diff <= 1e-5, "{d:?}: {diff:e}");
    }
}

#[test]
fn discretized_bath_conserves_norm_and_tracks_laplace() {
    let sys = SystemConfig::new(1.0, 0.0);
    let d = SpectralDensity::Lorentzian { g: 1.0, gamma: 0.5, delta_c: 0.0 };
    let grid = TimeGrid::uniform(0.0, 20.0, 101).unwrap();
    let bath = discretize_bath(&d, 2000, None, DiscretizationStrategy::UniformGrid).unwrap();
    assert!(bath.recurrence_time() > 20.0);
    let run = solve_discretized_run(&sys, &bath, &grid).unwrap();
    assert!(run.norm_defect <= 1e-8, "{}", run.norm_defect);
    let laplace = invert(&build_amplitude(&sys, &d).unwrap(), &grid, InversionEngine::Talbot).unwrap();
    assert!(sup_p1(&laplace, &run.trace) <= 1e-2);
}

#[test]
fn coarse_bath_reports_its_recurrence() {
    let d = SpectralDensity::Lorentzian { g: 1.0, gamma: 0.5, delta_c: 0.0 };
    let bath = discretize_bath(&d, 50, None, DiscretizationStrategy::UniformGrid).unwrap();
    let grid = TimeGrid::uniform(0.0, 40.0, 81).unwrap();
    let run = solve_discretized_run(&SystemConfig::new(1.0, 0.0), &bath, &grid).unwrap();
    let t = run.trace.valid_until.expect("recurrence inside the window");
    assert!((t - bath.recurrence_time()).abs() < 1e-12 && t < 40.0);
}

#[test]
fn decay_rate_agrees_across_engines() {
    let sys = SystemConfig::new(1.0, 0.3);
    let d = SpectralDensity::Lorentzian { g: 1.2, gamma: 0.8, delta_c: 0.2 };
    let grid = TimeGrid::uniform(0.0, 20.0, 201).unwrap();
    let (t, f) = both(&sys, &d, &grid);
    let v = solve_volterra(&sys, &d, &grid).unwrap();
    let (rt, rf, rv) = (
        effective_decay_rate(&t).unwrap(),
        effective_decay_rate(&f).unwrap(),
        effective_decay_rate(&v).unwrap(),
    );
    for k in 0..grid.len() {
        let tk = grid.points()[k];
        // The rate is −ln(P1)/t; a P1 error δ becomes δ/(P1 t).
        let scale = |tol: f64| 10.0 * tol / (t.p1[k] * tk).max(1e-300);
        if let (Some(a), Some(b), Some(c)) = (rt[k], rf[k], rv[k]) {
            assert!((a - b).abs() <= scale(1e-6), "t = {tk}");
            assert!((a - c).abs() <= scale(1e-5), "t = {tk}");
        }
    }
}

#[test]
fn markovian_inversion_is_closed_form() {
    let grid = TimeGrid::uniform(0.0, 20.0, 401).unwrap();
    for gt in [0.2, 2.0, 3.999_999_9, 4.0, 4.000_000_1, 8.0, 40.0] {
        let d = SpectralDensity::Markovian { gamma_tilde: gt };
        let (t, f) = both(&SystemConfig::new(1.0, 0.0), &d, &grid);
        for (k, &tk) in grid.points().iter().enumerate() {
            let want = c1_closed_form(tk, gt, 1.0);
            assert!((t.c1_tilde[k] - want).norm() <= 1e-8, "γ̃ = {gt}, t = {tk}");
            assert!((f.c1_tilde[k] - want).norm() <= 1e-8, "γ̃ = {gt}, t = {tk}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The bath can hand population back, but never more than it took.
    #[test]
    fn population_stays_below_one(
        g in 0.1..5.0f64,
        gamma in 0.1..5.0f64,
        dc in -3.0..3.0f64,
        eps in -3.0..3.0f64,
        theta in 0.0..std::f64::consts::FRAC_PI_2,
    ) {
        let sys = SystemConfig::new(1.0, eps)
            .with_initial(Complex64::new(theta.cos(), 0.0), Complex64::new(0.0, theta.sin()));
        let d = SpectralDensity::Lorentzian { g, gamma, delta_c: dc };
        let grid = TimeGrid::uniform(0.0, 10.0, 501).unwrap();
        let v = solve_volterra(&sys, &d, &grid).unwrap();
        let c2 = v.c2_tilde.as_ref().expect("volterra returns c2");
        let total: Vec<f64> = v.c1_tilde.iter().zip(c2).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect();
        prop_assert!((total[0] - 1.0).abs() < 1e-12);
        for p in total {
            prop_assert!(p <= 1.0 + 1e-6, "{p}");
        }
    }

    /// Markovian P1 stays in [0, 1] and matches the closed form for any γ̃.
    #[test]
    fn markovian_closed_form_everywhere(gt in 0.0..60.0f64, t in 0.0..30.0f64) {
        let f = build_amplitude(&SystemConfig::new(1.0, 0.0), &SpectralDensity::Markovian { gamma_tilde: gt }).unwrap();
        let grid = TimeGrid::from_points(vec![t]).unwrap();
        let c = invert(&f, &grid, InversionEngine::Talbot).unwrap().c1_tilde[0];
        let want = c1_closed_form(t, gt, 1.0);
        prop_assert!((c - want).norm() <= 1e-8);
        prop_assert!(c.norm_sqr() <= 1.0 + 1e-12);
    }
}
