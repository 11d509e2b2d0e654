//! Small-degree complex polynomials and their roots.

use num_complex::Complex64;

/// Coefficients in ascending order: `c[0] + c[1] s + …`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<Complex64>);

impl Poly {
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let z = Complex64::new(0.0, 0.0);
        Poly(
            (0..n)
                .map(|k| *self.0.get(k).unwrap_or(&z) + *other.0.get(k).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly(self.0.iter().map(|x| x * c).collect())
    }

    /// All roots with multiplicity. Degree 1 and 2 in closed form, higher by Aberth iteration.
    pub fn roots(&self) -> Vec<Complex64> {
        let mut c = self.0.clone();
        while c.len() > 1 && c[c.len() - 1].norm() == 0.0 {
            c.pop();
        }
        match c.len() {
            0 | 1 => vec![],
            2 => vec![-c[0] / c[1]],
            3 => quadratic(c[2], c[1], c[0]),
            _ => aberth(&Poly(c)),
        }
    }
}

fn quadratic(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the sign that avoids cancellation.
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    if q.norm() == 0.0 {
        return vec![Complex64::new(0.0, 0.0); 2];
    }
    let mut r = vec![q / a, c / q];
    r.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    r
}

fn aberth(p: &Poly) -> Vec<Complex64> {
    let n = p.degree();
    let lead = p.0[n];
    let bound = 1.0 + p.0[..n].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
    let dp = p.derivative();
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * bound, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let pk = p.eval(z[k]);
            let dk = dp.eval(z[k]);
            if pk.norm() == 0.0 {
                continue;
            }
            let ratio = pk / dk;
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / z[k].norm().max(1e-300));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    z.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    z
}
