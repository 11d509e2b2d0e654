//! Adaptive Gauss–Kronrod (10/21) quadrature for complex-valued integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn qk21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for k in 0..10 {
        let x = h * XGK[k];
        let s = f(c - x) + f(c + x);
        kronrod += s * WGK[k];
        if k % 2 == 1 {
            gauss += s * WG[k / 2];
        }
    }
    ((kronrod * h), ((kronrod - gauss) * h).norm())
}

/// ∫ₐᵇ f, splitting first at every interior breakpoint.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![lo];
    edges.extend(cuts);
    edges.push(hi);

    let mut pieces: Vec<Piece> = Vec::new();
    let mut evals = 0;
    for w in edges.windows(2) {
        let (v, e) = qk21(&mut f, w[0], w[1]);
        evals += 21;
        pieces.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }

    loop {
        let total: Complex64 = pieces.iter().map(|p| p.value).sum();
        let err: f64 = pieces.iter().map(|p| p.error).sum();
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::NonConvergence {
                what: "quadrature (non-finite integrand)",
                at: Complex64::new(lo, hi),
            });
        }
        if err <= tol.abs.max(tol.rel * total.norm()) {
            return Ok(QuadResult {
                value: total * sign,
                error: err,
                evaluations: evals,
            });
        }
        if pieces.len() >= tol.max_intervals {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                at: Complex64::new(lo, hi),
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one piece");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval can no longer be split; accept what we have.
            return Ok(QuadResult {
                value: (total) * sign,
                error: err,
                evaluations: evals,
            });
        }
        for (x0, x1) in [(p.a, mid), (mid, p.b)] {
            let (v, e) = qk21(&mut f, x0, x1);
            evals += 21;
            pieces.push(Piece {
                a: x0,
                b: x1,
                value: v,
                error: e,
            });
        }
    }
}

/// ∫ₐ^∞ f via `x = a + u/(1−u)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    let mapped: Vec<f64> = breakpoints
        .iter()
        .filter(|&&x| x > a)
        .map(|&x| (x - a) / (1.0 + x - a))
        .collect();
    integrate(
        |u| {
            if u >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let d = 1.0 - u;
            let v = f(a + u / d) / (d * d);
            if v.re.is_finite() && v.im.is_finite() {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        },
        0.0,
        1.0,
        &mapped,
        tol,
    )
}

/// ∫_{−∞}^{b} f.
pub fn integrate_from_neg_infinity<F: FnMut(f64) -> Complex64>(
    mut f: F,
    b: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<QuadResult> {
    let mirrored: Vec<f64> = breakpoints.iter().map(|x| -x).collect();
    integrate_to_infinity(|x| f(-x), -b, &mirrored, tol)
}

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on the Legendre recurrence).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| Complex64::new(x * x, -x), 0.0, 2.0, &[], Tolerance::new(1e-14, 1e-14)).unwrap();
        assert!((r.value - Complex64::new(8.0 / 3.0, -2.0)).norm() < 1e-14);
    }

    #[test]
    fn oscillatory() {
        // ∫₀^{10} e^{-i 7x} dx = (1 − e^{−70i})/(7i)
        let r = integrate(
            |x| Complex64::new(0.0, -7.0 * x).exp(),
            0.0,
            10.0,
            &[],
            Tolerance::new(1e-13, 1e-13),
        )
        .unwrap();
        let exact = (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -70.0).exp()) / Complex64::new(0.0, 7.0);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn semi_infinite() {
        let r = integrate_to_infinity(|x| Complex64::new((-x).exp(), 0.0), 1.0, &[], Tolerance::new(1e-14, 1e-13))
            .unwrap();
        assert!((r.value.re - (-1.0f64).exp()).abs() < 1e-13);
        let r = integrate_from_neg_infinity(
            |x| Complex64::new(1.0 / (1.0 + x * x), 0.0),
            0.0,
            &[],
            Tolerance::new(1e-13, 1e-13),
        )
        .unwrap();
        assert!((r.value.re - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn legendre_rule() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
