//! Time-domain solvers that never touch the Laplace domain.
//!
//! `solve_volterra` integrates the reduced pair
//! `dc̃₁/dt = −i𝒥 c̃₂ e^{−iεt}`, `dc̃₂/dt = −i𝒥 c̃₁ e^{iεt} − ∫₀ᵗ R(t−t') c̃₂(t') dt'`;
//! `solve_discretized` propagates qubits plus a finite set of bath modes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::kernel_r;
use crate::model::{AmplitudeTrace, Method, SpectralDensity, SystemConfig, TimeGrid, Topology};
use crate::quad::{gauss_legendre, integrate, integrate_to_infinity, Tolerance};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Default Volterra step, in units of 1/𝒥.
pub const DEFAULT_STEP: f64 = 0.05;
/// Error estimates above this demand a smaller step.
pub const REFINE_LIMIT: f64 = 1e-3;
const GL_POINTS: usize = 10;
/// Local tolerance of the bath integrator.
pub const BATH_TOLERANCE: f64 = 1e-10;

/// How the damped qubit loses amplitude: a delta-correlated bath or a memory kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum Memory {
    /// `−β c̃₂` with β = γ̃/2 + iδ.
    Local(Complex64),
    /// `−w ∫ R(t−t') c̃₂(t') dt'`.
    Kernel { density: SpectralDensity, weight: f64 },
}

/// The equivalent two-qubit problem: coupling √N·𝒥, and for a shared bath N·R.
pub fn reduce(system: &SystemConfig, density: &SpectralDensity) -> Result<(f64, Memory)> {
    system.validate()?;
    density.validate()?;
    let n = system.n_qubits as f64;
    let weight = match (system.n_qubits, system.topology) {
        (1, _) | (_, Topology::SeparateBaths) => 1.0,
        (_, Topology::CommonBath) => n,
    };
    let memory = match density {
        SpectralDensity::Markovian { gamma_tilde } => {
            Memory::Local(Complex64::new(0.5 * weight * gamma_tilde, system.lamb_shift))
        }
        d => Memory::Kernel {
            density: d.clone(),
            weight,
        },
    };
    Ok((system.effective_coupling(), memory))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolterraOptions {
    pub step: f64,
    /// Combine steps h and h/2 into a fourth-order-in-practice estimate.
    pub richardson: bool,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        VolterraOptions {
            step: DEFAULT_STEP,
            richardson: true,
        }
    }
}

/// Amplitudes on the uniform nodes `k·step`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolterraSolution {
    pub step: f64,
    pub coupling: f64,
    pub epsilon: f64,
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
    /// Memory integral at each node.
    pub memory: Vec<Complex64>,
}

impl VolterraSolution {
    pub fn end(&self) -> f64 {
        self.step * (self.c1.len() - 1) as f64
    }

    fn derivs(&self, k: usize) -> (Complex64, Complex64) {
        let t = k as f64 * self.step;
        let ph = (I * self.epsilon * t).exp();
        let j = self.coupling;
        (-I * j * self.c2[k] / ph, -I * j * self.c1[k] * ph - self.memory[k])
    }

    /// (c̃₁, c̃₂) at any `t` in range, by cubic Hermite interpolation between nodes.
    pub fn at(&self, t: f64) -> Result<(Complex64, Complex64)> {
        let n = self.c1.len() - 1;
        let x = t / self.step;
        if !(x >= -1e-9 && x <= n as f64 + 1e-9) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.end())));
        }
        let k = (x.floor() as usize).min(n.saturating_sub(1));
        let u = (x - k as f64).clamp(0.0, 1.0);
        if n == 0 || u < 1e-12 {
            return Ok((self.c1[k], self.c2[k]));
        }
        if u > 1.0 - 1e-12 {
            return Ok((self.c1[k + 1], self.c2[k + 1]));
        }
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u),
            u * (1.0 - u) * (1.0 - u),
            u * u * (3.0 - 2.0 * u),
            u * u * (u - 1.0),
        );
        let (d1a, d2a) = self.derivs(k);
        let (d1b, d2b) = self.derivs(k + 1);
        let h = self.step;
        let c1 = self.c1[k] * h00 + d1a * (h * h10) + self.c1[k + 1] * h01 + d1b * (h * h11);
        let c2 = self.c2[k] * h00 + d2a * (h * h10) + self.c2[k + 1] * h01 + d2b * (h * h11);
        Ok((c1, c2))
    }
}

/// Product-integration weights `(A_j, C_j)` of R against the hat functions on `[jh, (j+1)h]`.
fn kernel_moments(density: &SpectralDensity, weight: f64, h: f64, n: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let (x, w) = gauss_legendre(GL_POINTS);
    let mut a = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    for j in 0..n {
        let (mut aj, mut cj) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (xi, wi) in x.iter().zip(&w) {
            let v = 0.5 * (1.0 + xi); // (u − jh)/h
            let r = kernel_r((j as f64 + v) * h, density)? * (0.5 * h * wi * weight);
            aj += r * v;
            cj += r * (1.0 - v);
        }
        a.push(aj);
        c.push(cj);
    }
    Ok((a, c))
}

/// Implicit trapezoidal stepping with product-integrated memory, on `[0, t_end]` at step `h`.
pub fn volterra_raw(
    coupling: f64,
    epsilon: f64,
    memory: &Memory,
    initial: (Complex64, Complex64),
    t_end: f64,
    h: f64,
) -> Result<VolterraSolution> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config("run.volterra_step", format!("step {h} must be positive")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end = {t_end}")));
    }
    let n = (t_end / h - 1e-9).ceil().max(0.0) as usize;
    let (moments_a, moments_c) = match memory {
        Memory::Local(_) => (Vec::new(), Vec::new()),
        Memory::Kernel { density, weight } => kernel_moments(density, *weight, h, n.max(1))?,
    };
    let j = coupling;
    let half = 0.5 * h;
    let mut c1 = Vec::with_capacity(n + 1);
    let mut c2 = Vec::with_capacity(n + 1);
    let mut mem = Vec::with_capacity(n + 1);
    c1.push(initial.0);
    c2.push(initial.1);
    mem.push(match memory {
        Memory::Local(beta) => beta * initial.1,
        Memory::Kernel { .. } => Complex64::new(0.0, 0.0),
    });
    // Coefficient of the unknown c̃₂ in the memory integral at the new node.
    let diag = match memory {
        Memory::Local(beta) => *beta,
        Memory::Kernel { .. } => moments_c[0],
    };
    for step in 0..n {
        let t0 = step as f64 * h;
        let t1 = t0 + h;
        let (e0, e1) = ((I * epsilon * t0).exp(), (I * epsilon * t1).exp());
        // Known part of the memory integral at t1.
        let rest = match memory {
            Memory::Local(_) => Complex64::new(0.0, 0.0),
            Memory::Kernel { .. } => {
                let m = step + 1;
                let mut s = moments_a[0] * c2[m - 1];
                for q in 1..m {
                    s += moments_c[q] * c2[m - q] + moments_a[q] * c2[m - q - 1];
                }
                s
            }
        };
        let a12 = I * half * j / e1;
        let a21 = I * half * j * e1;
        let a22 = 1.0 + half * diag;
        let r1 = c1[step] - I * half * j * c2[step] / e0;
        let r2 = c2[step] - I * half * j * c1[step] * e0 - half * (rest + mem[step]);
        let det = a22 - a12 * a21;
        let n1 = (r1 * a22 - a12 * r2) / det;
        let n2 = (r2 - a21 * r1) / det;
        c1.push(n1);
        c2.push(n2);
        mem.push(match memory {
            Memory::Local(beta) => beta * n2,
            Memory::Kernel { .. } => diag * n2 + rest,
        });
    }
    Ok(VolterraSolution {
        step: h,
        coupling,
        epsilon,
        c1,
        c2,
        memory: mem,
    })
}

/// Volterra trace with default options.
pub fn solve_volterra(system: &SystemConfig, density: &SpectralDensity, grid: &TimeGrid) -> Result<AmplitudeTrace> {
    solve_volterra_with(system, density, grid, VolterraOptions::default())
}

/// Step `h` is shrunk so that uniform output grids land on solver nodes.
pub fn solve_volterra_with(
    system: &SystemConfig,
    density: &SpectralDensity,
    grid: &TimeGrid,
    opts: VolterraOptions,
) -> Result<AmplitudeTrace> {
    let (j, memory) = reduce(system, density)?;
    let t_end = *grid.points().last().expect("grid is nonempty");
    let h = match grid.uniform_step() {
        Some(dt) => dt / (dt / opts.step).ceil(),
        None => opts.step,
    };
    let init = (system.initial_c1, system.initial_c2);
    let coarse = volterra_raw(j, system.epsilon, &memory, init, t_end, h)?;
    let fine = volterra_raw(j, system.epsilon, &memory, init, t_end, 0.5 * h)?;
    let mut c1 = Vec::with_capacity(grid.len());
    let mut c2 = Vec::with_capacity(grid.len());
    let mut err = Vec::with_capacity(grid.len());
    for &t in grid.points() {
        let (a1, a2) = coarse.at(t)?;
        let (b1, b2) = fine.at(t)?;
        if opts.richardson {
            c1.push((4.0 * b1 - a1) / 3.0);
            c2.push((4.0 * b2 - a2) / 3.0);
            err.push((b1 - a1).norm() / 3.0);
        } else {
            c1.push(a1);
            c2.push(a2);
            err.push(4.0 * (b1 - a1).norm() / 3.0);
        }
    }
    let worst = err.iter().copied().fold(0.0, f64::max);
    if worst > REFINE_LIMIT {
        return Err(Error::Refinement {
            estimate: worst,
            limit: REFINE_LIMIT,
        });
    }
    let mut trace = AmplitudeTrace::new(grid.clone(), c1, Method::Volterra);
    trace.c2_tilde = Some(c2);
    trace.error_estimate = err;
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiscretizationStrategy {
    UniformGrid,
    GaussQuadratureNodes,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BathDiscretization {
    /// Mode detunings Δ_λ = ω_λ − ω_eg'.
    pub mode_detunings: Vec<f64>,
    pub mode_couplings: Vec<f64>,
    pub strategy: DiscretizationStrategy,
    pub support: (f64, f64),
    /// ∫J over the support.
    pub support_weight: f64,
    /// ∫J over the support divided by ∫J over all frequencies.
    pub captured_fraction: f64,
    pub warnings: Vec<String>,
}

impl BathDiscretization {
    pub fn len(&self) -> usize {
        self.mode_detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mode_detunings.is_empty()
    }

    /// Σ g².
    pub fn discrete_weight(&self) -> f64 {
        self.mode_couplings.iter().map(|g| g * g).sum()
    }

    /// Time after which the finite bath starts to return amplitude.
    pub fn recurrence_time(&self) -> f64 {
        let d = &self.mode_detunings;
        let gap = d.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if gap > 0.0 {
            2.0 * std::f64::consts::PI / gap
        } else {
            f64::INFINITY
        }
    }
}

/// ∫J over `[a, b]` (detuning variable).
pub fn density_weight(density: &SpectralDensity, a: f64, b: f64) -> Result<f64> {
    let f = |x: f64| Complex64::new(density.at_detuning(x).unwrap_or(0.0), 0.0);
    let mut bp = vec![0.0];
    match density {
        SpectralDensity::Lorentzian { gamma, delta_c, .. } => {
            bp.extend([*delta_c, delta_c - gamma, delta_c + gamma]);
        }
        SpectralDensity::Ohmic { s, omega_c, omega_eg, .. } => bp.push(s * omega_c - omega_eg),
        SpectralDensity::Tabulated(t) => bp.extend(t.omega().iter().map(|w| w - t.omega_eg_prime())),
        SpectralDensity::Markovian { .. } => {}
    }
    Ok(integrate(f, a, b, &bp, Tolerance::new(1e-14, 1e-13))?.value.re)
}

/// Replace the continuum by `n_modes` discrete modes on `support` (default support if `None`).
pub fn discretize_bath(
    density: &SpectralDensity,
    n_modes: usize,
    support: Option<(f64, f64)>,
    strategy: DiscretizationStrategy,
) -> Result<BathDiscretization> {
    density.validate()?;
    if matches!(density, SpectralDensity::Markovian { .. }) {
        return Err(Error::Unsupported("a Markovian bath has no modes to discretize".into()));
    }
    if n_modes < 2 {
        return Err(Error::config("run.bath_modes", format!("need at least 2 modes, got {n_modes}")));
    }
    let (a, b) = match support {
        Some(s) => s,
        None => density.default_support().expect("non-Markovian density has a support"),
    };
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Domain(format!("bad bath support [{a}, {b}]")));
    }
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match strategy {
        DiscretizationStrategy::UniformGrid => {
            let dw = (b - a) / n_modes as f64;
            ((0..n_modes).map(|k| a + (k as f64 + 0.5) * dw).collect(), vec![dw; n_modes])
        }
        DiscretizationStrategy::GaussQuadratureNodes => {
            let (x, w) = gauss_legendre(n_modes);
            let half = 0.5 * (b - a);
            (
                x.iter().map(|x| a + half * (1.0 + x)).collect(),
                w.iter().map(|w| w * half).collect(),
            )
        }
    };
    let couplings: Vec<f64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| (density.at_detuning(x).unwrap_or(0.0) * w).sqrt())
        .collect();
    let support_weight = density_weight(density, a, b)?;
    let total = total_weight(density)?;
    let captured = if total > 0.0 { support_weight / total } else { 1.0 };
    let mut warnings = Vec::new();
    if captured < 0.999 {
        warnings.push(format!(
            "bath support [{a}, {b}] holds {:.3}% of the spectral weight",
            100.0 * captured
        ));
    }
    Ok(BathDiscretization {
        mode_detunings: nodes,
        mode_couplings: couplings,
        strategy,
        support: (a, b),
        support_weight,
        captured_fraction: captured,
        warnings,
    })
}

fn total_weight(density: &SpectralDensity) -> Result<f64> {
    match density {
        SpectralDensity::Ohmic { omega_c, omega_eg, .. } => {
            // The closed form g² is the integral over ω > 0; confirm numerically past 30 ωc.
            let hi = 30.0 * omega_c - omega_eg;
            let f = |x: f64| Complex64::new(density.at_detuning(x).unwrap_or(0.0), 0.0);
            Ok(density_weight(density, -omega_eg, hi)?
                + integrate_to_infinity(f, hi, &[], Tolerance::new(1e-16, 1e-12))?.value.re)
        }
        d => Ok(d.total_weight().unwrap_or(0.0)),
    }
}

/// A discretized-bath run with its worst norm defect.
#[derive(Clone, Debug, PartialEq)]
pub struct BathRun {
    pub trace: AmplitudeTrace,
    /// max_t |Σ|c|² − 1|.
    pub norm_defect: f64,
}

pub fn solve_discretized(system: &SystemConfig, bath: &BathDiscretization, grid: &TimeGrid) -> Result<AmplitudeTrace> {
    Ok(solve_discretized_run(system, bath, grid)?.trace)
}

/// Propagate `x' = −iHx` for the arrow Hamiltonian of qubit 1, qubit 2 and the bath modes.
pub fn solve_discretized_run(system: &SystemConfig, bath: &BathDiscretization, grid: &TimeGrid) -> Result<BathRun> {
    system.validate()?;
    let j = system.effective_coupling();
    let eps = system.epsilon;
    let scale = match (system.n_qubits, system.topology) {
        (1, _) | (_, Topology::SeparateBaths) => 1.0,
        (n, Topology::CommonBath) => (n as f64).sqrt(),
    };
    let g: Vec<f64> = bath.mode_couplings.iter().map(|g| g * scale).collect();
    let d: Vec<f64> = bath.mode_detunings.iter().map(|x| x + eps).collect();
    let rhs = |x: &[Complex64], out: &mut [Complex64]| {
        let mut s = j * x[0] + eps * x[1];
        for k in 0..g.len() {
            s += g[k] * x[k + 2];
            out[k + 2] = -I * (g[k] * x[1] + d[k] * x[k + 2]);
        }
        out[0] = -I * (j * x[1]);
        out[1] = -I * s;
    };
    let mut x = vec![Complex64::new(0.0, 0.0); g.len() + 2];
    x[0] = system.initial_c1;
    x[1] = system.initial_c2;
    let norm0: f64 = x.iter().map(|c| c.norm_sqr()).sum();
    let mut solver = Dopri5::new(x.len(), BATH_TOLERANCE);
    let mut t = 0.0;
    let mut c1 = Vec::with_capacity(grid.len());
    let mut c2 = Vec::with_capacity(grid.len());
    let mut defect = 0.0f64;
    for &target in grid.points() {
        solver.advance(&rhs, &mut x, t, target)?;
        t = target;
        let norm: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        defect = defect.max((norm - norm0).abs());
        c1.push(x[0]);
        c2.push(x[1] * (I * eps * t).exp());
    }
    let mut trace = AmplitudeTrace::new(grid.clone(), c1, Method::DiscretizedBath);
    trace.c2_tilde = Some(c2);
    trace.error_estimate = vec![BATH_TOLERANCE; grid.len()];
    trace.warnings.extend(bath.warnings.iter().cloned());
    let t_rec = bath.recurrence_time();
    if grid.points().last().is_some_and(|&t| t > t_rec) {
        trace.valid_until = Some(t_rec);
        trace
            .warnings
            .push(format!("results beyond the bath recurrence time {t_rec:.4} are not physical"));
    }
    if defect > 1e-8 {
        trace.warnings.push(format!("norm drifted by {defect:.2e}"));
    }
    Ok(BathRun {
        trace,
        norm_defect: defect,
    })
}

/// Dormand–Prince 5(4) with step-size control, for complex linear systems.
struct Dopri5 {
    tol: f64,
    h: f64,
    k: [Vec<Complex64>; 7],
    tmp: Vec<Complex64>,
    next: Vec<Complex64>,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri5 {
    fn new(n: usize, tol: f64) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); n];
        Dopri5 {
            tol,
            h: 0.01,
            k: std::array::from_fn(|_| z.clone()),
            tmp: z.clone(),
            next: z,
        }
    }

    fn advance(
        &mut self,
        f: &dyn Fn(&[Complex64], &mut [Complex64]),
        x: &mut Vec<Complex64>,
        t0: f64,
        t1: f64,
    ) -> Result<()> {
        let mut t = t0;
        let mut steps = 0usize;
        while t < t1 {
            let last = t + self.h >= t1;
            let h = if last { t1 - t } else { self.h };
            f(x, &mut self.k[0]);
            for s in 1..7 {
                for i in 0..x.len() {
                    let mut acc = x[i];
                    for (r, a) in A[s][..s].iter().enumerate() {
                        if *a != 0.0 {
                            acc += self.k[r][i] * (h * a);
                        }
                    }
                    self.tmp[i] = acc;
                }
                f(&self.tmp, &mut self.k[s]);
            }
            // Stage 7 was evaluated at the fifth-order solution, which is tmp.
            let mut err = 0.0f64;
            for i in 0..x.len() {
                let mut e = Complex64::new(0.0, 0.0);
                for s in 0..7 {
                    if E[s] != 0.0 {
                        e += self.k[s][i] * (h * E[s]);
                    }
                }
                self.next[i] = self.tmp[i];
                let sc = self.tol * (1.0 + x[i].norm().max(self.tmp[i].norm()));
                err = err.max(e.norm() / sc);
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + h };
                std::mem::swap(x, &mut self.next);
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if !last || err > 1.0 {
                self.h = h * factor;
            }
            steps += 1;
            if steps > 50_000_000 || self.h < 1e-14 {
                return Err(Error::NonConvergence {
                    what: "bath integrator step size",
                    at: Complex64::new(t, 0.0),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_rabi() {
        let d = SpectralDensity::Lorentzian {
            g: 0.0,
            gamma: 0.5,
            delta_c: 0.0,
        };
        let grid = TimeGrid::uniform(0.0, 10.0, 101).unwrap();
        let tr = solve_volterra(&SystemConfig::new(1.0, 0.0), &d, &grid).unwrap();
        for (t, c) in grid.points().iter().zip(&tr.c1_tilde) {
            assert!((c - t.cos()).norm() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn local_damping_matches_closed_form() {
        let d = SpectralDensity::Markovian { gamma_tilde: 2.0 };
        let grid = TimeGrid::uniform(0.0, 10.0, 51).unwrap();
        let tr = solve_volterra(&SystemConfig::new(1.0, 0.0), &d, &grid).unwrap();
        for (t, c) in grid.points().iter().zip(&tr.c1_tilde) {
            let want = crate::markovian::c1_closed_form(*t, 2.0, 1.0);
            assert!((c - want).norm() < 1e-6, "t={t}: {c} vs {want}");
        }
    }

    #[test]
    fn dopri_rotation() {
        let f = |x: &[Complex64], out: &mut [Complex64]| out[0] = -I * 3.0 * x[0];
        let mut x = vec![Complex64::new(1.0, 0.0)];
        let mut s = Dopri5::new(1, 1e-12);
        s.advance(&f, &mut x, 0.0, 5.0).unwrap();
        assert!((x[0] - (-I * 15.0).exp()).norm() < 1e-9);
    }
}
