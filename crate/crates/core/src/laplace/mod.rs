//! Laplace-domain amplitude F₁(s) and its numerical inversion.
//!
//! `F₁(s) = [c₁(0) D(s) − i𝒥 c₂(0)] / [s D(s) + 𝒥²]` with `D(s) = s + iε + B(s + iε)`.
//! The N-satellite variants replace 𝒥 by √N·𝒥 and, for a shared bath, B by N·B.

pub mod fourier;
pub mod poles;
pub mod talbot;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{KernelTransform, RationalB};
use crate::model::{AmplitudeTrace, Method, SpectralDensity, SystemConfig, TimeGrid, Topology};

pub use poles::Poly;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Beyond this time rational amplitudes come from the matrix exponential.
pub const LONG_TIME: f64 = 50.0;
const WARN_ERROR: f64 = 1e-3;
/// Rational amplitudes whose contour estimate exceeds this use the matrix exponential.
const CONTOUR_TARGET: f64 = 1e-9;
const CAUCHY_NODES: usize = 32;
/// How far left of the imaginary axis continued poles are collected.
const POLE_REACH: f64 = 10.0;
/// Distance kept from the continued cut when counting zeros.
const CUT_OFFSET: f64 = 1e-7;

fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> [Complex64; 4] {
    [
        Complex64::new(x0, y0),
        Complex64::new(x1, y0),
        Complex64::new(x1, y1),
        Complex64::new(x0, y1),
    ]
}

/// Zeros of `h` inside a counter-clockwise polygon, by the argument principle.
fn winding(h: &dyn Fn(Complex64) -> Result<Complex64>, corners: &[Complex64]) -> Result<usize> {
    fn edge(h: &dyn Fn(Complex64) -> Result<Complex64>, a: Complex64, b: Complex64, ha: Complex64, hb: Complex64, depth: u32) -> Result<f64> {
        let turn = (hb / ha).arg();
        if turn.abs() < 0.3 || depth == 0 {
            if depth == 0 && turn.abs() > 1.0 {
                return Err(Error::Contour("argument principle: phase jumps along an edge".into()));
            }
            return Ok(turn);
        }
        let m = 0.5 * (a + b);
        let hm = h(m)?;
        Ok(edge(h, a, m, ha, hm, depth - 1)? + edge(h, m, b, hm, hb, depth - 1)?)
    }
    let mut total = 0.0;
    let n = corners.len();
    for k in 0..n {
        let (a, b) = (corners[k], corners[(k + 1) % n]);
        // Start from a fixed subdivision so no short-period winding slips through.
        let pieces = 64;
        let pts: Vec<Complex64> = (0..=pieces).map(|i| a + (b - a) * (i as f64 / pieces as f64)).collect();
        let vals: Vec<Complex64> = pts.iter().map(|&z| h(z)).collect::<Result<_>>()?;
        for i in 0..pieces {
            total += edge(h, pts[i], pts[i + 1], vals[i], vals[i + 1], 24)?;
        }
    }
    let turns = total / (2.0 * std::f64::consts::PI);
    let count = turns.round();
    if (turns - count).abs() > 0.1 || count < 0.0 {
        return Err(Error::Contour(format!("argument principle gave {turns:.3} turns")));
    }
    Ok(count as usize)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AmplitudeTopology {
    TwoQubit,
    NSeparateBaths,
    NCommonBath,
    MarkovianTwoQubit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InversionEngine {
    Talbot,
    FourierSeries,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceAmplitude {
    topology: AmplitudeTopology,
    /// 𝒥, or √N·𝒥 for N satellites.
    coupling: f64,
    epsilon: f64,
    kernel: KernelTransform,
    c1: Complex64,
    c2: Complex64,
}

/// Roots of the denominator of a rational F₁ with their residues.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleList {
    pub poles: Vec<Complex64>,
    /// `None` for members of a (numerically) repeated root.
    pub residues: Vec<Option<Complex64>>,
    /// Location of a repeated root, if any.
    pub double_root: Option<Complex64>,
}

impl PoleList {
    /// `−2 max Re p` over the poles that actually carry weight.
    pub fn gamma_infinity(&self) -> f64 {
        let scale = self
            .residues
            .iter()
            .flatten()
            .map(|r| r.norm())
            .fold(0.0, f64::max);
        let mut best = f64::NEG_INFINITY;
        for (p, r) in self.poles.iter().zip(&self.residues) {
            let live = match r {
                None => true,
                Some(r) => r.norm() > 1e-10 * scale.max(1e-300),
            };
            if live {
                best = best.max(p.re);
            }
        }
        -2.0 * best
    }

    /// The pole that dominates at late times.
    pub fn slowest(&self) -> Option<Complex64> {
        self.poles.iter().copied().max_by(|a, b| a.re.total_cmp(&b.re))
    }
}

/// `dx/dt = M x` whose first component is c̃₁(t).
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    pub matrix: DMatrix<Complex64>,
    pub initial: DVector<Complex64>,
}

impl StateSpace {
    /// Largest real part of the spectrum.
    pub fn growth(&self) -> f64 {
        self.matrix
            .clone()
            .eigenvalues()
            .map(|e| e.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
            .unwrap_or_else(|| {
                let n = self.matrix.nrows();
                let roots = char_poly(&self.matrix, n).roots();
                roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
            })
    }

    /// c̃₁(t) = e^{μt} [exp((M − μ)t) x₀]₁.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        let (mu, v) = self.shifted(t);
        v * (mu * t).exp()
    }

    /// ln|c̃₁(t)|, representable far beyond where |c̃₁| underflows.
    pub fn log_amplitude(&self, t: f64) -> f64 {
        let (mu, v) = self.shifted(t);
        mu * t + v.norm().ln()
    }

    fn shifted(&self, t: f64) -> (f64, Complex64) {
        let mu = self.growth();
        let n = self.matrix.nrows();
        let a = (&self.matrix - DMatrix::<Complex64>::identity(n, n) * c(mu)) * c(t);
        let e = a.exp();
        ((mu), (e * &self.initial)[0])
    }
}

/// Characteristic polynomial of a 2×2 or 3×3 matrix (fallback when the eigen solver fails).
fn char_poly(m: &DMatrix<Complex64>, n: usize) -> Poly {
    if n == 2 {
        let tr = m[(0, 0)] + m[(1, 1)];
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        return Poly(vec![det, -tr, c(1.0)]);
    }
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    let det = m.determinant();
    Poly(vec![-det, minors, -tr, c(1.0)])
}

impl LaplaceAmplitude {
    fn from_parts(
        topology: AmplitudeTopology,
        coupling: f64,
        epsilon: f64,
        kernel: KernelTransform,
        c1: Complex64,
        c2: Complex64,
    ) -> Self {
        LaplaceAmplitude {
            topology,
            coupling,
            epsilon,
            kernel,
            c1,
            c2,
        }
    }

    pub fn topology(&self) -> AmplitudeTopology {
        self.topology
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kernel(&self) -> &KernelTransform {
        &self.kernel
    }

    pub fn initial(&self) -> (Complex64, Complex64) {
        (self.c1, self.c2)
    }

    pub fn is_rational(&self) -> bool {
        self.kernel.is_rational()
    }

    fn combine(&self, s: Complex64, b: Complex64) -> Result<Complex64> {
        let d = s + I * self.epsilon + b;
        let j = self.coupling;
        let den = s * d + j * j;
        if den.norm() == 0.0 {
            return Err(Error::PoleHit { s });
        }
        Ok((self.c1 * d - I * j * self.c2) / den)
    }

    /// F₁(s) on the physical sheet.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let b = self.kernel.eval(s + I * self.epsilon)?;
        self.combine(s, b)
    }

    /// F₁(s) with B continued through its cut (lower left of the branch point).
    pub fn eval_continued(&self, s: Complex64) -> Result<Complex64> {
        let b = self.kernel.eval_continued(s + I * self.epsilon)?;
        self.combine(s, b)
    }

    /// Branch point of F₁ on the imaginary axis, if B has one.
    pub fn branch_point(&self) -> Option<f64> {
        self.kernel.branch_point().map(|h| h - self.epsilon)
    }

    /// Range of Im s holding the poles and branch points of F₁; an estimate unless B is rational.
    pub fn singular_band(&self) -> (f64, f64) {
        if let Ok(p) = self.poles() {
            let lo = p.poles.iter().map(|p| p.im).fold(f64::INFINITY, f64::min);
            let hi = p.poles.iter().map(|p| p.im).fold(f64::NEG_INFINITY, f64::max);
            return (lo, hi);
        }
        let reach = 2.0 * self.coupling + 1.0;
        let mut lo = (-self.epsilon).min(0.0) - reach;
        let mut hi = (-self.epsilon).max(0.0) + reach;
        match self.kernel.density() {
            SpectralDensity::Tabulated(t) => {
                // B(z) is singular where z = −iΔ for Δ on the support.
                let w = t.omega();
                let w0 = t.omega_eg_prime();
                lo = lo.min(-(w[w.len() - 1] - w0) - self.epsilon);
                hi = hi.max(-(w[0] - w0) - self.epsilon);
            }
            _ => {
                if let Some(hb) = self.branch_point() {
                    let top = bound_state_height(self, hb).unwrap_or(hb);
                    hi = hi.max(top + 0.5).max(hb + 0.5);
                }
            }
        }
        (lo, hi)
    }

    /// Numerator and denominator polynomials when B is rational.
    pub fn rational_form(&self) -> Option<(Poly, Poly)> {
        let j = self.coupling;
        let ie = I * self.epsilon;
        let z = Poly(vec![ie, c(1.0)]); // s + iε
        let s = Poly(vec![c(0.0), c(1.0)]);
        let j2 = Poly(vec![c(j * j)]);
        let c2term = -I * j * self.c2;
        match self.kernel.rational()? {
            RationalB::Constant(beta) => {
                let d = z.add(&Poly(vec![beta]));
                let num = d.scale(self.c1).add(&Poly(vec![c2term]));
                let den = s.mul(&d).add(&j2);
                Some((num, den))
            }
            RationalB::SinglePole { weight, kappa } => {
                let zk = z.add(&Poly(vec![kappa]));
                let core = z.mul(&zk).add(&Poly(vec![c(weight)]));
                let num = core.scale(self.c1).add(&zk.scale(c2term));
                let den = s.mul(&core).add(&zk.scale(c(j * j)));
                Some((num, den))
            }
        }
    }

    /// The linear system whose first component is c̃₁(t), when B is rational.
    pub fn state_space(&self) -> Option<StateSpace> {
        let j = self.coupling;
        let ie = I * self.epsilon;
        let ij = -I * j;
        match self.kernel.rational()? {
            RationalB::Constant(beta) => Some(StateSpace {
                matrix: DMatrix::from_row_slice(2, 2, &[c(0.0), ij, ij, -ie - beta]),
                initial: DVector::from_vec(vec![self.c1, self.c2]),
            }),
            RationalB::SinglePole { weight, kappa } => Some(StateSpace {
                matrix: DMatrix::from_row_slice(
                    3,
                    3,
                    &[c(0.0), ij, c(0.0), ij, -ie, c(-1.0), c(0.0), c(weight), -(kappa + ie)],
                ),
                initial: DVector::from_vec(vec![self.c1, self.c2, c(0.0)]),
            }),
        }
    }

    /// Long-time value of ln|c̃₁(t)| for rational kernels.
    pub fn log_amplitude(&self, t: f64) -> Result<f64> {
        let ss = self.state_space().ok_or_else(not_rational)?;
        Ok(ss.log_amplitude(t))
    }

    /// Poles of a rational F₁ with residues.
    pub fn poles(&self) -> Result<PoleList> {
        rational_poles(self)
    }

    /// Numerator and denominator of F₁ on the continued sheet.
    fn parts_continued(&self, s: Complex64) -> Result<(Complex64, Complex64)> {
        let b = self.kernel.eval_continued(s + I * self.epsilon)?;
        let d = s + I * self.epsilon + b;
        let j = self.coupling;
        Ok((self.c1 * d - I * j * self.c2, s * d + j * j))
    }

    /// Distance from `s` to the branch point and the continued cut, if any.
    fn cut_distance(&self, s: Complex64) -> f64 {
        match self.branch_point() {
            Some(hb) => (s - I * hb).norm().min((s.im - hb).abs().max(s.re.max(0.0))),
            None => f64::INFINITY,
        }
    }

    fn den_derivative(&self, p: Complex64) -> Result<Complex64> {
        let rho = (0.25 * self.cut_distance(p)).min(0.1);
        let mut acc = c(0.0);
        for k in 0..CAUCHY_NODES {
            let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / CAUCHY_NODES as f64);
            acc += self.parts_continued(p + rho * e)?.1 / e;
        }
        Ok(acc / (rho * CAUCHY_NODES as f64))
    }

    fn newton(&self, mut s: Complex64) -> Option<Complex64> {
        for _ in 0..60 {
            let h = self.parts_continued(s).ok()?.1;
            let step = h / self.den_derivative(s).ok()?;
            if !step.is_finite() {
                return None;
            }
            s -= step;
            if step.norm() < 1e-14 * (1.0 + s.norm()) {
                return Some(s);
            }
        }
        None
    }

    /// Poles of F₁ continued through the cut of B, with residues, over the strip
    /// `Re s ∈ [−POLE_REACH, 0]` around the singular band. Zeros of the denominator
    /// are counted by the argument principle and isolated by bisection.
    pub fn continued_poles(&self) -> Result<Vec<(Complex64, Complex64)>> {
        let hb = self
            .branch_point()
            .ok_or_else(|| Error::Unsupported("continued poles need a branch point".into()))?;
        let (lo, hi) = self.singular_band();
        let (bottom, top) = (lo.min(hb) - 2.0, hi.max(hb) + 2.0);
        let mut found = Vec::new();
        // The continued cut runs left from the branch point: count on either side of it.
        for (y0, y1) in [(bottom, hb - CUT_OFFSET), (hb + CUT_OFFSET, top)] {
            let r = [-POLE_REACH, 0.05, y0, y1];
            let n = self.zero_count(r)?;
            self.isolate(r, n, 40, &mut found)?;
        }
        found
            .into_iter()
            .map(|p: Complex64| {
                let (n, _) = self.parts_continued(p)?;
                // Bound states sit on the axis; drop rounding in the real part.
                let p = if p.re.abs() < 1e-12 { Complex64::new(0.0, p.im) } else { p };
                Ok((p, n / self.den_derivative(p)?))
            })
            .collect()
    }

    fn zero_count(&self, [x0, x1, y0, y1]: [f64; 4]) -> Result<usize> {
        winding(&|s| self.parts_continued(s).map(|p| p.1), &rect(x0, x1, y0, y1))
    }

    fn isolate(&self, r: [f64; 4], count: usize, depth: u32, out: &mut Vec<Complex64>) -> Result<()> {
        let [x0, x1, y0, y1] = r;
        if count == 0 {
            return Ok(());
        }
        if count == 1 {
            if let Some(p) = self.newton(Complex64::new(0.5 * (x0 + x1), 0.5 * (y0 + y1))) {
                let pad = 1e-9 * (1.0 + p.norm());
                if p.re >= x0 - pad && p.re <= x1 + pad && p.im >= y0 - pad && p.im <= y1 + pad {
                    out.push(p);
                    return Ok(());
                }
            }
        }
        if depth == 0 {
            return Err(Error::Contour(format!(
                "could not isolate {count} poles in [{x0}, {x1}] × [{y0}, {y1}]"
            )));
        }
        // Off-centre cut so a split line rarely runs through a zero.
        let f = 0.5 + 0.0173;
        let (a, b) = if x1 - x0 >= y1 - y0 {
            let xm = x0 + f * (x1 - x0);
            ([x0, xm, y0, y1], [xm, x1, y0, y1])
        } else {
            let ym = y0 + f * (y1 - y0);
            ([x0, x1, y0, ym], [x0, x1, ym, y1])
        };
        let na = self.zero_count(a)?;
        if na > count {
            return Err(Error::Contour("inconsistent zero counts".into()));
        }
        self.isolate(a, na, depth - 1, out)?;
        self.isolate(b, count - na, depth - 1, out)
    }
}

/// Highest real root y > h_b of `𝒥² − y(y + ε − b(y))`, where `B(iy + iε) = −i b(y)`.
/// These are bound states sitting on the imaginary axis above the branch point.
fn bound_state_height(f: &LaplaceAmplitude, hb: f64) -> Option<f64> {
    let j = f.coupling();
    let span = 10.0 + 4.0 * j;
    let n = 400;
    let h = |y: f64| -> Option<f64> {
        let s = Complex64::new(0.0, y);
        let b = f.kernel().eval(s + Complex64::new(0.0, f.epsilon())).ok()?;
        Some(j * j - y * (y + f.epsilon() + b.im))
    };
    let mut top = None;
    let mut prev = h(hb + 1e-9)?;
    for k in 1..=n {
        let y = hb + span * k as f64 / n as f64;
        let v = h(y)?;
        if prev > 0.0 && v <= 0.0 {
            top = Some(y);
        }
        prev = v;
    }
    top
}

fn not_rational() -> Error {
    Error::Unsupported("pole analysis needs a Markovian or Lorentzian kernel".into())
}

fn check_kernel(system: &SystemConfig, kernel: &KernelTransform) -> Result<()> {
    system.validate()?;
    kernel.density().validate()
}

fn two_qubit_topology(kernel: &KernelTransform) -> AmplitudeTopology {
    if matches!(kernel.density(), SpectralDensity::Markovian { .. }) {
        AmplitudeTopology::MarkovianTwoQubit
    } else {
        AmplitudeTopology::TwoQubit
    }
}

/// Two qubits, the second one damped.
pub fn build_f1(system: &SystemConfig, kernel: &KernelTransform) -> Result<LaplaceAmplitude> {
    check_kernel(system, kernel)?;
    Ok(LaplaceAmplitude::from_parts(
        two_qubit_topology(kernel),
        system.coupling_j,
        system.epsilon,
        kernel.clone(),
        system.initial_c1,
        system.initial_c2,
    ))
}

fn n_satellites(system: &SystemConfig) -> Result<f64> {
    if system.n_qubits < 1 {
        return Err(Error::config("system.n_qubits", "n_qubits must be at least 1"));
    }
    Ok(system.n_qubits as f64)
}

/// N satellites, each with its own bath: coupling √N·𝒥.
pub fn build_f1_n_baths(system: &SystemConfig, kernel: &KernelTransform) -> Result<LaplaceAmplitude> {
    let n = n_satellites(system)?;
    check_kernel(system, kernel)?;
    Ok(LaplaceAmplitude::from_parts(
        AmplitudeTopology::NSeparateBaths,
        system.coupling_j * n.sqrt(),
        system.epsilon,
        kernel.clone(),
        system.initial_c1,
        system.initial_c2,
    ))
}

/// N satellites sharing one bath: coupling √N·𝒥 and kernel N·B.
pub fn build_f1_common_bath(system: &SystemConfig, kernel: &KernelTransform) -> Result<LaplaceAmplitude> {
    let n = n_satellites(system)?;
    check_kernel(system, kernel)?;
    let k = kernel.clone().with_weight(kernel.weight() * n);
    Ok(LaplaceAmplitude::from_parts(
        AmplitudeTopology::NCommonBath,
        system.coupling_j * n.sqrt(),
        system.epsilon,
        k,
        system.initial_c1,
        system.initial_c2,
    ))
}

/// Pick the builder from the system's qubit count and topology.
pub fn build_amplitude(system: &SystemConfig, density: &SpectralDensity) -> Result<LaplaceAmplitude> {
    let mut kernel = KernelTransform::new(density);
    if matches!(density, SpectralDensity::Markovian { .. }) {
        kernel = kernel.with_lamb_shift(system.lamb_shift);
    }
    if system.n_qubits == 1 {
        return build_f1(system, &kernel);
    }
    match system.topology {
        Topology::SeparateBaths => build_f1_n_baths(system, &kernel),
        Topology::CommonBath => build_f1_common_bath(system, &kernel),
    }
}

/// Roots of the denominator (with multiplicity), residues, and any repeated root.
pub fn rational_poles(f: &LaplaceAmplitude) -> Result<PoleList> {
    let (num, den) = f.rational_form().ok_or_else(not_rational)?;
    let poles = den.roots();
    let dden = den.derivative();
    let mut double_root = None;
    let mut residues = Vec::with_capacity(poles.len());
    for (i, &p) in poles.iter().enumerate() {
        let repeated = poles
            .iter()
            .enumerate()
            .any(|(j, &q)| j != i && (p - q).norm() < 1e-6 * (1.0 + p.norm()));
        if repeated {
            double_root.get_or_insert(p);
            residues.push(None);
        } else {
            residues.push(Some(num.eval(p) / dden.eval(p)));
        }
    }
    Ok(PoleList {
        poles,
        residues,
        double_root,
    })
}

/// c̃₁ on `grid`. Rational amplitudes beyond [`LONG_TIME`] bypass the contour.
pub fn invert(f: &LaplaceAmplitude, grid: &TimeGrid, engine: InversionEngine) -> Result<AmplitudeTrace> {
    let state = if f.is_rational() { f.state_space() } else { None };
    let geometry = match engine {
        InversionEngine::Talbot => {
            let needs_contour = grid.points().iter().any(|&t| t > 0.0 && (state.is_none() || t <= LONG_TIME));
            match (needs_contour, &state) {
                (false, _) => None,
                // Pole geometry can fail where the matrix exponential still works.
                (true, Some(_)) => talbot::Geometry::of(f).ok(),
                (true, None) => Some(talbot::Geometry::of(f)?),
            }
        }
        InversionEngine::FourierSeries => None,
    };
    let mut values = Vec::with_capacity(grid.len());
    let mut errors = Vec::with_capacity(grid.len());
    for &t in grid.points() {
        let (v, e) = if t == 0.0 {
            (f.c1, 0.0)
        } else if let (Some(ss), true) = (&state, t > LONG_TIME) {
            (ss.amplitude(t), 1e-14)
        } else {
            match engine {
                InversionEngine::Talbot => {
                    let contour = geometry.as_ref().map(|g| talbot::invert_at(f, t, g));
                    match (contour, &state) {
                        (Some(Ok((v, e))), _) if e <= CONTOUR_TARGET || state.is_none() => (v, e),
                        // Poles spread far in Im s need a contour too wide for double precision.
                        (_, Some(ss)) => (ss.amplitude(t), 1e-14),
                        (Some(r), None) => r?,
                        (None, None) => unreachable!("geometry is built when there is no state space"),
                    }
                }
                InversionEngine::FourierSeries => {
                    let (lo, hi) = f.singular_band();
                    fourier::invert_at(&|s| f.eval(s), t, lo.abs().max(hi.abs()))?
                }
            }
        };
        values.push(v);
        errors.push(e);
    }
    let method = match engine {
        InversionEngine::Talbot => Method::LaplaceTalbot,
        InversionEngine::FourierSeries => Method::LaplaceFourier,
    };
    let mut trace = AmplitudeTrace::new(grid.clone(), values, method);
    let worst = errors.iter().copied().fold(0.0, f64::max);
    if worst > WARN_ERROR {
        let at = grid.points()[errors.iter().position(|&e| e == worst).unwrap_or(0)];
        trace
            .warnings
            .push(format!("inversion error estimate {worst:.2e} at t = {at} exceeds {WARN_ERROR:e}"));
    }
    trace.error_estimate = errors;
    Ok(trace)
}
