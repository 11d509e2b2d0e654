use num_complex::Complex64;
use proptest::prelude::*;
use qzeno::gamma::{upper_incomplete_gamma, upper_incomplete_gamma_recurrence, upper_incomplete_gamma_scaled};
use qzeno::quad::{integrate_to_infinity, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Γ(a, z) as ∫₀^∞ (z+u)^{a−1} e^{−z−u} du along the horizontal ray, which never meets the cut.
fn oracle(a: f64, z: Complex64) -> Complex64 {
    let f = |u: f64| {
        let t = z + u;
        ((a - 1.0) * t.ln() - t).exp()
    };
    let scale = ((a - 1.0) * z.ln() - z).exp().norm().max(1e-300);
    let tol = Tolerance {
        abs: 1e-15 * scale,
        rel: 1e-14,
        max_intervals: 20_000,
    };
    let bp = [z.norm(), 2.0 * z.norm() + 1.0, 10.0];
    integrate_to_infinity(f, 0.0, &bp, tol).unwrap().value
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn pinned_values() {
    // Reference values from 30-digit arithmetic.
    let cases = [
        (0.5, Complex64::new(0.25, 0.0), Complex64::new(0.849_891_838_079_931_1, 0.0)),
        (-2.0, Complex64::new(1.0, 1.0), Complex64::new(-0.049_550_715_360_612_53, -0.012_272_298_606_401_42)),
        (-1.5, Complex64::new(-3.0, 0.5), Complex64::new(1.727_118_327_516_585_8, -1.435_761_685_551_467)),
        (-2.0, Complex64::new(-10.0, -0.2), Complex64::new(-34.351_085_759_231_34, -2.819_243_698_499_164_7)),
        (-2.5, Complex64::new(-50.0, -0.4), Complex64::new(2_292_503_246_406_429.3, -5_886_692_580_720_344.2)),
    ];
    for (a, z, want) in cases {
        let got = upper_incomplete_gamma(a, z).unwrap();
        assert!(rel(got, want) < 1e-12, "Γ({a}, {z}) = {got}, want {want}");
    }
}

#[test]
fn pinned_values_match_quadrature_oracle() {
    let want = oracle(0.5, Complex64::new(0.25, 0.0));
    assert!(rel(want, Complex64::new(0.849_891_838_079_931_1, 0.0)) < 1e-12);
    let z = Complex64::new(1.0, 1.0);
    let o = oracle(-2.0, z);
    assert!(rel(upper_incomplete_gamma_recurrence(-2.0, z).unwrap(), o) < 1e-10);
}

#[test]
fn random_orders_and_arguments_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1ce);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = rng.random_range(-3.0..1.0);
        let r = 10f64.powf(rng.random_range((0.1f64).log10()..(20.0f64).log10()));
        let th = rng.random_range(-0.75 * std::f64::consts::PI..0.75 * std::f64::consts::PI);
        let z = Complex64::from_polar(r, th);
        let got = upper_incomplete_gamma(a, z).unwrap();
        let e = rel(got, oracle(a, z));
        worst = worst.max(e);
        assert!(e < 1e-10, "a={a} z={z}: rel err {e:e}");
    }
    assert!(worst < 1e-10);
}

#[test]
fn recurrence_path_agrees_with_direct_path() {
    for &(a, re, im) in &[(-2.0, 1.0, 1.0), (-1.3, 4.0, -2.0), (-2.7, 0.3, 0.6), (-0.5, 12.0, 3.0)] {
        let z = Complex64::new(re, im);
        let d = upper_incomplete_gamma(a, z).unwrap();
        let r = upper_incomplete_gamma_recurrence(a, z).unwrap();
        assert!(rel(r, d) < 1e-10, "a={a} z={z}");
    }
}

#[test]
fn scaled_form_survives_large_arguments() {
    // e^z Γ(a, z) ~ z^{a−1} for |z| → ∞.
    for &(re, im) in &[(0.5, 5000.0), (-3000.0, -0.3), (800.0, 0.0)] {
        let z = Complex64::new(re, im);
        let v = upper_incomplete_gamma_scaled(-2.0, z).unwrap();
        let lead = (-3.0 * z.ln()).exp();
        assert!(rel(v, lead) < 1e-2, "z={z}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upward_recurrence_identity(a in -3.0f64..1.0, r in 0.1f64..60.0, th in -3.1f64..3.1) {
        let z = Complex64::from_polar(r, th);
        let lhs = upper_incomplete_gamma_scaled(a + 1.0, z).unwrap();
        let rhs = a * upper_incomplete_gamma_scaled(a, z).unwrap() + (a * z.ln()).exp();
        let scale = lhs.norm().max(rhs.norm()).max((a * z.ln()).exp().norm());
        prop_assert!((lhs - rhs).norm() <= 1e-9 * scale);
    }

    #[test]
    fn conjugate_symmetry(a in -3.0f64..2.0, r in 0.1f64..30.0, th in 0.01f64..3.1) {
        let z = Complex64::from_polar(r, th);
        let up = upper_incomplete_gamma_scaled(a, z).unwrap();
        let down = upper_incomplete_gamma_scaled(a, z.conj()).unwrap();
        prop_assert!((up.conj() - down).norm() <= 1e-12 * up.norm());
    }
}
