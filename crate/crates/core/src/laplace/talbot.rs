//! Fixed Talbot contour `s(θ) = σ₀ + iω₀ + rθ(cot θ + i)`, θ ∈ (−π, π).
//!
//! The contour is centred on the singularities' mid-height ω₀ and widened until
//! it encloses every pole (and, for the Ohmic bath, the branch point).

use std::f64::consts::PI;

use num_complex::Complex64;

use super::LaplaceAmplitude;
use crate::error::{Error, Result};
use crate::model::SpectralDensity;

const M_MIN: usize = 24;
/// Node counts tried for each radius; the best by convergence estimate wins.
const M_CANDIDATES: [usize; 3] = [48, 72, 104];
/// Step between the node counts compared for the error estimate.
const M_CHECK: usize = 8;
/// Radius multiples of the minimum enclosing radius. Tighter contours amplify less
/// rounding but converge more slowly.
const RADIUS_FACTORS: [f64; 2] = [1.1, 1.25];
/// Above this estimate the contour result is rejected outright.
const GIVE_UP: f64 = 1e-2;
/// Contour abscissa once the poles are subtracted; the branch point sits on Re s = 0.
const SUBTRACTED_SHIFT: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub sigma0: f64,
    pub center: f64,
    pub half_height: f64,
    /// Sample B along the contour for jumps (non-rational kernels).
    pub guard: bool,
    /// Poles taken out of F before inversion and added back as `a e^{pt}`.
    pub subtracted: Vec<(Complex64, Complex64)>,
}

impl Geometry {
    pub fn of(f: &LaplaceAmplitude) -> Result<Geometry> {
        if let Some(poles) = f.poles().ok() {
            let re = poles.poles.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
            let lo = poles.poles.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
            let hi = poles.poles.iter().map(|p| p.im).fold(f64::NEG_INFINITY, f64::max);
            return Ok(Geometry {
                sigma0: re + 0.1,
                center: 0.5 * (lo + hi),
                half_height: 0.5 * (hi - lo),
                guard: false,
                subtracted: Vec::new(),
            });
        }
        match f.kernel().density() {
            SpectralDensity::Ohmic { .. } => {
                // With the poles removed only the branch point is left to enclose,
                // so the contour can stay tight at late times.
                if let (Ok(p), Some(hb)) = (f.continued_poles(), f.branch_point()) {
                    return Ok(Geometry {
                        sigma0: SUBTRACTED_SHIFT,
                        center: hb,
                        half_height: 0.0,
                        guard: true,
                        subtracted: p,
                    });
                }
                let (lo, hi) = f.singular_band();
                Ok(Geometry {
                    sigma0: 0.5,
                    center: 0.5 * (lo + hi),
                    half_height: 0.5 * (hi - lo),
                    guard: true,
                    subtracted: Vec::new(),
                })
            }
            _ => Err(Error::Contour(
                "a tabulated density cannot be continued across its cut; use the Fourier engine".into(),
            )),
        }
    }

    /// Radii worth trying at time `t`.
    fn radii(&self, t: f64) -> Vec<f64> {
        let base = 2.0 * M_MIN as f64 / (5.0 * t);
        let enclose = self.half_height / (PI / 2.0);
        RADIUS_FACTORS.iter().map(|k| (k * enclose).max(base)).collect()
    }
}

fn node(g: &Geometry, r: f64, theta: f64) -> (Complex64, Complex64) {
    if theta == 0.0 {
        return (Complex64::new(g.sigma0 + r, g.center), Complex64::new(1.0, 0.0));
    }
    let cot = 1.0 / theta.tan();
    let s = Complex64::new(g.sigma0 + r * theta * cot, g.center + r * theta);
    let sigma = theta + (theta * cot - 1.0) * cot;
    (s, Complex64::new(1.0, sigma))
}

fn sum(f: &dyn Fn(Complex64) -> Result<Complex64>, g: &Geometry, t: f64, r: f64, m: usize) -> Result<(Complex64, f64)> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for k in -(m as i64 - 1)..=(m as i64 - 1) {
        let theta = k as f64 * PI / m as f64;
        let (s, w) = node(g, r, theta);
        let term = (s * t).exp() * f(s)? * w;
        acc += term;
        mag += term.norm();
    }
    let scale = r / (2.0 * m as f64);
    Ok((acc * scale, mag * scale))
}

/// Reject contours along which the integrand jumps (a crossed cut or a near pole).
///
/// Weighted by |e^{st}|: far out on the left tail a pole beyond the subtraction
/// reach can sit next to the contour without touching the result.
fn continuity_guard(
    f: &dyn Fn(Complex64) -> Result<Complex64>,
    g: &Geometry,
    t: f64,
    r: f64,
    m: usize,
) -> Result<()> {
    let n = 8 * m;
    let lim = PI * (1.0 - 1.0 / m as f64);
    let vals: Vec<Complex64> = (0..=n)
        .map(|k| {
            let s = node(g, r, -lim + 2.0 * lim * k as f64 / n as f64).0;
            Ok(f(s)? * (s.re * t).exp())
        })
        .collect::<Result<_>>()?;
    let d: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for k in 1..d.len() - 1 {
        let local = d[k - 1].max(d[k + 1]);
        if d[k] > 10.0 * local && d[k] > 1e-8 * scale {
            let s = node(g, r, -lim + 2.0 * lim * (k as f64 + 0.5) / n as f64).0;
            return Err(Error::Contour(format!("F jumps along the Talbot contour near s = {s}")));
        }
    }
    Ok(())
}

/// c̃₁(t) and an error estimate.
pub fn invert_at(f: &LaplaceAmplitude, t: f64, g: &Geometry) -> Result<(Complex64, f64)> {
    let eval = |s: Complex64| {
        let mut v = if g.guard { f.eval_continued(s)? } else { f.eval(s)? };
        for &(p, a) in &g.subtracted {
            v -= a / (s - p);
        }
        Ok(v)
    };
    if g.guard {
        let r = g.radii(t)[0];
        continuity_guard(&eval, g, t, r, M_CANDIDATES[0])?;
    }
    let (mut v, mut err) = best_of(&eval, t, g)?;
    for &(p, a) in &g.subtracted {
        v += a * (p * t).exp();
        err += 1e-12 * a.norm();
    }
    Ok((v, err))
}

/// Talbot inversion of an arbitrary transform whose singularities have real part below
/// `sigma0` and imaginary parts within `center ± half_height`.
pub fn invert_transform(
    f: &dyn Fn(Complex64) -> Result<Complex64>,
    t: f64,
    geometry: &Geometry,
) -> Result<(Complex64, f64)> {
    best_of(f, t, geometry)
}

fn best_of(f: &dyn Fn(Complex64) -> Result<Complex64>, t: f64, g: &Geometry) -> Result<(Complex64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Talbot inversion needs t > 0, got {t}")));
    }
    let mut best: Option<(Complex64, f64)> = None;
    for r in g.radii(t) {
        for &m in &M_CANDIDATES {
            let (a, _) = sum(f, g, t, r, m)?;
            let (b, _) = sum(f, g, t, r, m + M_CHECK)?;
            let (c, mag) = sum(f, g, t, r, m + 2 * M_CHECK)?;
            let err = (a - b).norm().max((b - c).norm()) + 1e-16 * mag;
            if best.is_none_or(|(_, e)| err < e) {
                best = Some((c, err));
            }
        }
    }
    let (v, err) = best.expect("candidates are nonempty");
    if err > GIVE_UP {
        return Err(Error::Contour(format!(
            "no Talbot contour converges at t = {t} (best estimate {err:.1e}); use the Fourier engine"
        )));
    }
    Ok((v, err))
}
