//! Memory kernel R(t) and its Laplace transform B(s).
//!
//! With `J(Δ)` the density at detuning `Δ = ω − ω_eg'`,
//! `R(t) = ∫ J(Δ) e^{−iΔt} dΔ` and `B(s) = ∫ J(Δ)/(s + iΔ) dΔ`.
//! The Ohmic `ω_eg` parameter plays the role of ω_eg' here.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::upper_incomplete_gamma_scaled;
use crate::model::{ohmic_normalization, SpectralDensity, TabulatedDensity};
use crate::quad::{integrate, integrate_from_neg_infinity, integrate_to_infinity, Tolerance};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// B(s) = g²/(s + γ/2 + iΔc).
pub fn lorentzian_b(s: Complex64, g: f64, gamma: f64, delta_c: f64) -> Result<Complex64> {
    let d = s + Complex64::new(0.5 * gamma, delta_c);
    if d.norm() == 0.0 {
        return Err(Error::PoleHit { s });
    }
    Ok(g * g / d)
}

/// B(s) = −i (g²/ωc) w^S e^{w} Γ(−S, w), w = −iK, K = (s − iω_eg)/ωc.
///
/// Physical sheet; the cut runs down the imaginary axis from `iω_eg`.
pub fn ohmic_b(s: Complex64, g: f64, s_exp: f64, omega_c: f64, omega_eg: f64) -> Result<Complex64> {
    if g == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k = (s - I * omega_eg) / omega_c;
    let w = -I * k;
    if w.norm() == 0.0 {
        // Branch point: the integral gives −i g²/(ωc S).
        return Ok(-I * g * g / (omega_c * s_exp));
    }
    // e^{−iK} Γ(−S, −iK) = e^{w} Γ(−S, w) is the scaled function. The power is taken
    // of w itself: i^{−S} K^S picks the wrong branch when K is in the third quadrant.
    let scaled = upper_incomplete_gamma_scaled(-s_exp, w)?;
    let ws = (s_exp * w.ln()).exp();
    Ok(-I * g * g / omega_c * ws * scaled)
}

/// Ohmic J continued to complex detuning Δ (principal power).
fn ohmic_density_complex(delta: Complex64, g: f64, s_exp: f64, omega_c: f64, omega_eg: f64) -> Complex64 {
    let x = (delta + omega_eg) / omega_c;
    ohmic_normalization(s_exp, omega_c) * g * g * omega_c * (s_exp * x.ln()).exp() * (-x).exp()
}

/// Ohmic B continued from Re s > 0 through the cut into the lower left.
///
/// For Re s < 0 below the branch point, `B_II(s) = B(s) + 2π J(is)`.
pub fn ohmic_b_continued(s: Complex64, g: f64, s_exp: f64, omega_c: f64, omega_eg: f64) -> Result<Complex64> {
    let b = ohmic_b(s, g, s_exp, omega_c, omega_eg)?;
    if s.re < 0.0 && s.im < omega_eg {
        Ok(b + 2.0 * PI * ohmic_density_complex(I * s, g, s_exp, omega_c, omega_eg))
    } else {
        Ok(b)
    }
}

fn log1p(w: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    Complex64::new(re, w.im.atan2(1.0 + w.re))
}

/// B(s) for a tabulated density, integrating the linear interpolant exactly per cell.
pub fn custom_b(s: Complex64, density: &TabulatedDensity) -> Result<Complex64> {
    let w = density.omega();
    let j = density.values();
    let w0 = density.omega_eg_prime();
    let n = w.len();
    if s.re.abs() <= 1e-12 {
        let pole = -s.im;
        let h_max = w.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
        if pole >= w[0] - w0 - h_max && pole <= w[n - 1] - w0 + h_max {
            return Err(Error::NearSingular { s });
        }
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n - 1 {
        let h = w[k + 1] - w[k];
        let c = s + I * (w[k] - w0);
        if c.norm() == 0.0 {
            return Err(Error::NearSingular { s });
        }
        // L = ∫₀ʰ du/(c+iu), M = ∫₀ʰ u du/(c+iu)
        let l = -I * log1p(I * h / c);
        let m = -I * (h - c * l);
        sum += j[k] * l + (j[k + 1] - j[k]) / h * m;
    }
    Ok(sum)
}

/// B(s) by adaptive quadrature of the density over its full support.
///
/// Works for every non-Markovian variant; slow, meant as a reference.
pub fn b_by_quadrature(s: Complex64, density: &SpectralDensity, abs_tol: f64) -> Result<Complex64> {
    let f = |delta: f64| match density.at_detuning(delta) {
        Some(v) => v / (s + I * delta),
        None => Complex64::new(0.0, 0.0),
    };
    let tol = Tolerance {
        abs: abs_tol,
        rel: abs_tol,
        max_intervals: 20_000,
    };
    let near = -s.im;
    let r = match density {
        SpectralDensity::Markovian { .. } => {
            return Err(Error::Unsupported("the Markovian bath has no spectral density".into()))
        }
        SpectralDensity::Lorentzian { gamma, delta_c, .. } => {
            let (lo, hi) = (delta_c - 50.0 * gamma, delta_c + 50.0 * gamma);
            let bp = [near, *delta_c, 0.0];
            let mid = integrate(f, lo, hi, &bp, tol)?.value;
            let left = integrate_from_neg_infinity(f, lo, &bp, tol)?.value;
            let right = integrate_to_infinity(f, hi, &bp, tol)?.value;
            mid + left + right
        }
        SpectralDensity::Ohmic { s: sx, omega_c, omega_eg, .. } => {
            let lo = -omega_eg;
            let peak = sx * omega_c - omega_eg;
            let hi = lo + 60.0 * omega_c;
            let bp = [near, peak, 0.0];
            integrate(f, lo, hi, &bp, tol)?.value + integrate_to_infinity(f, hi, &[], tol)?.value
        }
        SpectralDensity::Tabulated(t) => {
            let o = t.omega();
            let w0 = t.omega_eg_prime();
            let mut bp: Vec<f64> = o.iter().map(|x| x - w0).collect();
            bp.push(near);
            integrate(f, o[0] - w0, o[o.len() - 1] - w0, &bp, tol)?.value
        }
    };
    Ok(r)
}

/// ∫₀¹ e^{−iθv} dv and ∫₀¹ v e^{−iθv} dv.
fn phi01(theta: f64) -> (Complex64, Complex64) {
    if theta.abs() < 0.5 {
        let x = -I * theta;
        let mut p = Complex64::new(1.0, 0.0);
        let (mut a, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut fact = 1.0;
        for k in 0..25 {
            if k > 0 {
                p *= x;
                fact *= k as f64;
            }
            a += p / (fact * (k + 1) as f64);
            b += p / (fact * (k + 2) as f64);
        }
        (a, b)
    } else {
        let e = (-I * theta).exp();
        let a = (Complex64::new(1.0, 0.0) - e) / (I * theta);
        let b = I * e / theta - (Complex64::new(1.0, 0.0) - e) / (theta * theta);
        (a, b)
    }
}

fn tabulated_r(t: f64, d: &TabulatedDensity) -> Complex64 {
    let w = d.omega();
    let j = d.values();
    let w0 = d.omega_eg_prime();
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..w.len() - 1 {
        let h = w[k + 1] - w[k];
        let x0 = w[k] - w0;
        let (a, b) = phi01(h * t);
        sum += (-I * x0 * t).exp() * h * (j[k] * a + (j[k + 1] - j[k]) * b);
    }
    sum
}

/// R(t) = ∫ J(Δ) e^{−iΔt} dΔ, from closed forms (exact for the tabulated interpolant).
pub fn kernel_r(t: f64, density: &SpectralDensity) -> Result<Complex64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("kernel_R needs finite t >= 0, got {t}")));
    }
    match density {
        SpectralDensity::Markovian { .. } => Err(Error::Unsupported(
            "the Markovian kernel is a delta function; use the phenomenological damping route".into(),
        )),
        SpectralDensity::Lorentzian { g, gamma, delta_c } => {
            Ok(g * g * (-Complex64::new(0.5 * gamma, *delta_c) * t).exp())
        }
        SpectralDensity::Ohmic { g, s, omega_c, omega_eg } => {
            let base = Complex64::new(1.0, omega_c * t);
            Ok(g * g * (I * omega_eg * t).exp() * (-(s + 1.0) * base.ln()).exp())
        }
        SpectralDensity::Tabulated(d) => Ok(tabulated_r(t, d)),
    }
}

/// R(t) by adaptive quadrature; the reference the closed forms are checked against.
pub fn kernel_r_by_quadrature(t: f64, density: &SpectralDensity, abs_tol: f64) -> Result<Complex64> {
    let f = |delta: f64| match density.at_detuning(delta) {
        Some(v) => v * (-I * delta * t).exp(),
        None => Complex64::new(0.0, 0.0),
    };
    let tol = Tolerance {
        abs: abs_tol,
        rel: 0.0,
        max_intervals: 50_000,
    };
    match density {
        SpectralDensity::Markovian { .. } => Err(Error::Unsupported("no spectral density".into())),
        SpectralDensity::Lorentzian { gamma, delta_c, .. } => {
            let (lo, hi) = (delta_c - 50.0 * gamma, delta_c + 50.0 * gamma);
            Ok(integrate(f, lo, hi, &[*delta_c, 0.0], tol)?.value
                + integrate_from_neg_infinity(f, lo, &[], tol)?.value
                + integrate_to_infinity(f, hi, &[], tol)?.value)
        }
        _ => {
            let (lo, hi) = density.default_support().expect("non-Markovian support");
            let hi = if let SpectralDensity::Ohmic { omega_c, omega_eg, .. } = density {
                60.0 * omega_c - omega_eg
            } else {
                hi
            };
            Ok(integrate(f, lo, hi, &[0.0], tol)?.value)
        }
    }
}

/// Rational B(s): a constant, or `weight/(s + kappa)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RationalB {
    Constant(Complex64),
    SinglePole { weight: f64, kappa: Complex64 },
}

/// B(s) for one density, optionally scaled by a collective factor.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTransform {
    density: SpectralDensity,
    weight: f64,
    lamb_shift: f64,
}

impl KernelTransform {
    pub fn new(density: &SpectralDensity) -> Self {
        KernelTransform {
            density: density.clone(),
            weight: 1.0,
            lamb_shift: 0.0,
        }
    }

    /// Multiply B by `w` (N for a common bath).
    pub fn with_weight(mut self, w: f64) -> Self {
        self.weight = w;
        self
    }

    /// Real shift of the damped qubit's frequency; used with the Markovian bath only.
    pub fn with_lamb_shift(mut self, delta: f64) -> Self {
        self.lamb_shift = delta;
        self
    }

    pub fn density(&self) -> &SpectralDensity {
        &self.density
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_rational(&self) -> bool {
        self.density.is_rational()
    }

    pub fn rational(&self) -> Option<RationalB> {
        match &self.density {
            SpectralDensity::Markovian { gamma_tilde } => Some(RationalB::Constant(
                self.weight * Complex64::new(0.5 * gamma_tilde, 0.0) + I * self.lamb_shift,
            )),
            SpectralDensity::Lorentzian { g, gamma, delta_c } => Some(RationalB::SinglePole {
                weight: self.weight * g * g,
                kappa: Complex64::new(0.5 * gamma, *delta_c),
            }),
            _ => None,
        }
    }

    /// Physical-sheet B(s).
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let b = match &self.density {
            SpectralDensity::Markovian { gamma_tilde } => {
                return Ok(self.weight * 0.5 * gamma_tilde + I * self.lamb_shift)
            }
            SpectralDensity::Lorentzian { g, gamma, delta_c } => lorentzian_b(s, *g, *gamma, *delta_c)?,
            SpectralDensity::Ohmic { g, s: sx, omega_c, omega_eg } => ohmic_b(s, *g, *sx, *omega_c, *omega_eg)?,
            SpectralDensity::Tabulated(t) => custom_b(s, t)?,
        };
        Ok(self.weight * b)
    }

    /// B continued analytically from the right half plane across its cut.
    pub fn eval_continued(&self, s: Complex64) -> Result<Complex64> {
        match &self.density {
            SpectralDensity::Ohmic { g, s: sx, omega_c, omega_eg } => {
                Ok(self.weight * ohmic_b_continued(s, *g, *sx, *omega_c, *omega_eg)?)
            }
            SpectralDensity::Tabulated(_) if s.re < 0.0 => Err(Error::Contour(
                "a tabulated density has no analytic continuation; use the Fourier engine".into(),
            )),
            _ => self.eval(s),
        }
    }

    /// Height of the branch point of B on the imaginary axis; its cut runs downward.
    pub fn branch_point(&self) -> Option<f64> {
        match &self.density {
            SpectralDensity::Ohmic { omega_eg, .. } => Some(*omega_eg),
            SpectralDensity::Tabulated(t) => Some(t.omega_eg_prime() - t.omega()[0]),
            _ => None,
        }
    }
}
