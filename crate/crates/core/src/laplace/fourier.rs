//! Fourier series on the Bromwich line `Re s = A/(2t)` with Wynn ε-acceleration.
//!
//! With period 2t the series alternates:
//! `f(t) ≈ e^{A/2}/(2t) [F(σ) + Σ_{k≥1} (−1)^k (F(σ + ikπ/t) + F(σ − ikπ/t))]`.
//! Aliasing costs about `e^{−A}`; rounding is amplified by `e^{A/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const A: f64 = 25.0;
/// Partial sums handed to the ε-algorithm once the series has left the singular band.
const TAIL_TERMS: usize = 40;

/// f(t) and an error estimate. `omega_max` bounds |Im| of the singularities of `f`.
pub fn invert_at(
    f: &dyn Fn(Complex64) -> Result<Complex64>,
    t: f64,
    omega_max: f64,
) -> Result<(Complex64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Fourier inversion needs t > 0, got {t}")));
    }
    let sigma = A / (2.0 * t);
    // Each singularity smears over about A/(2π) terms; step well past the last one.
    let start = (omega_max * t / PI).ceil() as usize + (10.0 * A / (2.0 * PI)) as usize + 10;
    let mut total = f(Complex64::new(sigma, 0.0))?;
    let mut biggest = total.norm();
    let mut partial = Vec::with_capacity(TAIL_TERMS + 1);
    for k in 1..=start + TAIL_TERMS {
        let w = k as f64 * PI / t;
        let term = f(Complex64::new(sigma, w))? + f(Complex64::new(sigma, -w))?;
        biggest = biggest.max(term.norm());
        if k % 2 == 1 {
            total -= term;
        } else {
            total += term;
        }
        if k >= start {
            partial.push(total);
        }
    }
    let (sum, spread) = wynn_epsilon(&partial);
    let pref = (0.5 * A).exp() / (2.0 * t);
    let err = pref * (spread + 1e-16 * biggest * (start + TAIL_TERMS) as f64) + (-A).exp();
    Ok((pref * sum, err))
}

/// Limit of a sequence by Wynn's ε-algorithm, with the gap between the last two estimates.
pub fn wynn_epsilon(s: &[Complex64]) -> (Complex64, f64) {
    let Some(&last) = s.last() else {
        return (Complex64::new(0.0, 0.0), f64::INFINITY);
    };
    let mut prev = vec![Complex64::new(0.0, 0.0); s.len() + 1];
    let mut cur = s.to_vec();
    let mut estimates = vec![last];
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.norm() == 0.0 {
                // Column converged exactly.
                let e = *estimates.last().expect("nonempty");
                return (cur[i + 1], (cur[i + 1] - e).norm());
            }
            next.push(prev[i + 1] + d.inv());
        }
        prev = cur;
        cur = next;
        column += 1;
        if column % 2 == 0 {
            estimates.push(*cur.last().expect("nonempty"));
        }
    }
    let n = estimates.len();
    let best = estimates[n - 1];
    let spread = if n > 1 { (best - estimates[n - 2]).norm() } else { f64::INFINITY };
    (best, spread)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_pair() {
        let f = |s: Complex64| Ok(1.0 / (s + 1.0));
        for &t in &[0.1, 1.0, 5.0, 20.0] {
            let (v, e) = invert_at(&f, t, 1.0).unwrap();
            assert!((v - (-t as f64).exp()).norm() < 1e-10, "t={t}: {v} (est {e})");
        }
    }

    #[test]
    fn long_undamped_oscillation() {
        let f = |s: Complex64| Ok(1.0 / (s + Complex64::new(0.0, 10.0)));
        for &t in &[0.5, 3.0, 17.0, 40.0] {
            let (v, _) = invert_at(&f, t, 10.0).unwrap();
            let want = Complex64::new(0.0, -10.0 * t).exp();
            assert!((v - want).norm() < 1e-9, "t={t}: {v} vs {want}");
        }
    }

    #[test]
    fn epsilon_sums_alternating_log() {
        // 1 − 1/2 + 1/3 − … = ln 2
        let mut s = Vec::new();
        let mut acc = 0.0;
        for k in 1..30 {
            acc += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            s.push(Complex64::new(acc, 0.0));
        }
        let (v, _) = wynn_epsilon(&s);
        assert!((v.re - 2f64.ln()).abs() < 1e-13);
    }
}
