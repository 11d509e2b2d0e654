//! Domain types shared by every module.
//!
//! Frequencies and rates are in units of the inter-qubit coupling `J`, times
//! in units of `1/J`. Bath quantities are expressed through the detuning
//! `Δ = ω − ω_eg'` from the damped qubit's transition frequency.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::config::{parse_config, parse_config_with, parse_tabulated_csv, Engine, RunConfig, RunDirectives};

/// Half-width of the default Lorentzian support, in units of `γ`.
pub const LORENTZIAN_SUPPORT_WIDTHS: f64 = 40.0;
/// Upper end of the default Ohmic support, in units of `ωc`.
pub const OHMIC_SUPPORT_CUTOFFS: f64 = 30.0;

const NORM_TOL: f64 = 1e-12;

/// Bare level energies of the two qubits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitEnergies {
    pub omega_g: f64,
    pub omega_e: f64,
    pub omega_g_prime: f64,
    pub omega_e_prime: f64,
}

impl QubitEnergies {
    pub fn new(omega_g: f64, omega_e: f64, omega_g_prime: f64, omega_e_prime: f64) -> Result<Self> {
        let e = QubitEnergies {
            omega_g,
            omega_e,
            omega_g_prime,
            omega_e_prime,
        };
        e.validate()?;
        Ok(e)
    }

    /// Ground levels at zero.
    pub fn from_transitions(omega_eg: f64, omega_eg_prime: f64) -> Result<Self> {
        Self::new(0.0, omega_eg, 0.0, omega_eg_prime)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_g, self.omega_e, self.omega_g_prime, self.omega_e_prime];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("system.energies", "energies must be finite"));
        }
        if self.omega_e <= self.omega_g {
            return Err(Error::config(
                "system.energies.omega_e",
                format!("omega_e = {} must exceed omega_g = {}", self.omega_e, self.omega_g),
            ));
        }
        if self.omega_e_prime <= self.omega_g_prime {
            return Err(Error::config(
                "system.energies.omega_e_prime",
                format!(
                    "omega_e_prime = {} must exceed omega_g_prime = {}",
                    self.omega_e_prime, self.omega_g_prime
                ),
            ));
        }
        Ok(())
    }

    pub fn omega_eg(&self) -> f64 {
        self.omega_e - self.omega_g
    }

    pub fn omega_eg_prime(&self) -> f64 {
        self.omega_e_prime - self.omega_g_prime
    }

    pub fn epsilon(&self) -> f64 {
        self.omega_eg_prime() - self.omega_eg()
    }

    pub fn sum(&self) -> f64 {
        self.omega_g + self.omega_e + self.omega_g_prime + self.omega_e_prime
    }

    fn scaled(&self, by: f64) -> Self {
        QubitEnergies {
            omega_g: self.omega_g / by,
            omega_e: self.omega_e / by,
            omega_g_prime: self.omega_g_prime / by,
            omega_e_prime: self.omega_e_prime / by,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    #[serde(rename = "separate")]
    SeparateBaths,
    #[serde(rename = "common")]
    CommonBath,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub coupling_j: f64,
    pub epsilon: f64,
    /// Number of satellite qubits around the damped one; 1 is the two-qubit case.
    pub n_qubits: u32,
    pub topology: Topology,
    pub initial_c1: Complex64,
    pub initial_c2: Complex64,
    pub energies: Option<QubitEnergies>,
    /// Real shift added to ω_e' in the Markovian model. Off by default.
    pub lamb_shift: f64,
}

impl SystemConfig {
    /// Two qubits, excitation initially on qubit 1.
    pub fn new(coupling_j: f64, epsilon: f64) -> Self {
        SystemConfig {
            coupling_j,
            epsilon,
            n_qubits: 1,
            topology: Topology::SeparateBaths,
            initial_c1: Complex64::new(1.0, 0.0),
            initial_c2: Complex64::new(0.0, 0.0),
            energies: None,
            lamb_shift: 0.0,
        }
    }

    pub fn with_initial(mut self, c1: Complex64, c2: Complex64) -> Self {
        self.initial_c1 = c1;
        self.initial_c2 = c2;
        self
    }

    pub fn with_qubits(mut self, n: u32, topology: Topology) -> Self {
        self.n_qubits = n;
        self.topology = topology;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling_j.is_finite() && self.coupling_j > 0.0) {
            return Err(Error::config("system.J", format!("J = {} must be positive", self.coupling_j)));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::config("system.epsilon", "epsilon must be finite"));
        }
        if self.n_qubits < 1 {
            return Err(Error::config("system.n_qubits", "n_qubits must be at least 1"));
        }
        let norm = self.initial_c1.norm_sqr() + self.initial_c2.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::config(
                "system.c1_0",
                format!("|c1(0)|^2 + |c2(0)|^2 = {norm} must equal 1"),
            ));
        }
        if self.n_qubits > 1 && self.initial_c2.norm() > 0.0 {
            return Err(Error::config(
                "system.c2_0",
                "with n_qubits > 1 only c1_0 may be nonzero",
            ));
        }
        if let Some(e) = &self.energies {
            e.validate()?;
            let derived = e.epsilon();
            let scale = derived.abs().max(self.epsilon.abs()).max(1.0);
            if (derived - self.epsilon).abs() > 1e-12 * scale {
                return Err(Error::config(
                    "system.epsilon",
                    format!("epsilon = {} disagrees with the energies (which give {derived})", self.epsilon),
                ));
            }
        }
        if !self.lamb_shift.is_finite() {
            return Err(Error::config("system.lamb_shift", "must be finite"));
        }
        Ok(())
    }

    /// Collective coupling seen by the damped qubit: `√N·J`.
    pub fn effective_coupling(&self) -> f64 {
        self.coupling_j * (self.n_qubits as f64).sqrt()
    }

    /// Rescale every frequency by `J` so that the coupling becomes 1.
    pub fn normalized(&self) -> Self {
        let j = self.coupling_j;
        SystemConfig {
            coupling_j: 1.0,
            epsilon: self.epsilon / j,
            energies: self.energies.map(|e| e.scaled(j)),
            lamb_shift: self.lamb_shift / j,
            ..self.clone()
        }
    }
}

/// Piecewise-linear spectral density, zero outside the sampled range.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedDensity {
    omega: Vec<f64>,
    values: Vec<f64>,
    omega_eg_prime: f64,
}

impl TabulatedDensity {
    pub fn new(samples: &[(f64, f64)], omega_eg_prime: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::config("bath.samples", "need at least two samples"));
        }
        if !omega_eg_prime.is_finite() {
            return Err(Error::config("bath.omega_eg_prime", "must be finite"));
        }
        let mut omega = Vec::with_capacity(samples.len());
        let mut values = Vec::with_capacity(samples.len());
        for (k, &(w, j)) in samples.iter().enumerate() {
            if !(w.is_finite() && j.is_finite()) {
                return Err(Error::config("bath.samples", format!("sample {k} is not finite")));
            }
            if w < 0.0 {
                return Err(Error::config("bath.samples", format!("sample {k}: omega = {w} is negative")));
            }
            if j < 0.0 {
                return Err(Error::config("bath.samples", format!("sample {k}: J = {j} is negative")));
            }
            if let Some(&prev) = omega.last() {
                if w <= prev {
                    return Err(Error::config(
                        "bath.samples",
                        format!("omega grid not strictly increasing at sample {k} ({prev} then {w})"),
                    ));
                }
            }
            omega.push(w);
            values.push(j);
        }
        let t = TabulatedDensity {
            omega,
            values,
            omega_eg_prime,
        };
        if !t.total_weight().is_finite() {
            return Err(Error::config("bath.samples", "integral of J is not finite"));
        }
        Ok(t)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn omega_eg_prime(&self) -> f64 {
        self.omega_eg_prime
    }

    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.omega.iter().copied().zip(self.values.iter().copied()).collect()
    }

    /// J at absolute frequency `w`.
    pub fn eval(&self, w: f64) -> f64 {
        let n = self.omega.len();
        if w < self.omega[0] || w > self.omega[n - 1] {
            return 0.0;
        }
        let k = match self.omega.partition_point(|&x| x <= w) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (w0, w1) = (self.omega[k], self.omega[k + 1]);
        let f = (w - w0) / (w1 - w0);
        self.values[k] * (1.0 - f) + self.values[k + 1] * f
    }

    /// Trapezoid sum, exact for the interpolant.
    pub fn total_weight(&self) -> f64 {
        self.omega
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, j)| 0.5 * (w[1] - w[0]) * (j[0] + j[1]))
            .sum()
    }

    fn scaled(&self, by: f64) -> Self {
        TabulatedDensity {
            omega: self.omega.iter().map(|w| w / by).collect(),
            values: self.values.iter().map(|j| j / by).collect(),
            omega_eg_prime: self.omega_eg_prime / by,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpectralDensity {
    /// Flat reservoir with phenomenological decay rate γ̃.
    Markovian { gamma_tilde: f64 },
    /// Peak of width γ at detuning Δc = ωc − ω_eg'. Total weight g².
    Lorentzian { g: f64, gamma: f64, delta_c: f64 },
    /// `J(ω) = 𝒩 g² ωc (ω/ωc)^S e^{−ω/ωc}`; `omega_eg` is the damped qubit's frequency.
    Ohmic { g: f64, s: f64, omega_c: f64, omega_eg: f64 },
    Tabulated(TabulatedDensity),
}

/// `𝒩 = 1/(ωc² Γ(1+S))`.
pub fn ohmic_normalization(s: f64, omega_c: f64) -> f64 {
    1.0 / (omega_c * omega_c * statrs::function::gamma::gamma(1.0 + s))
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        fn nonneg(field: &str, x: f64) -> Result<()> {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("{x} must be finite and nonnegative")))
            }
        }
        fn positive(field: &str, x: f64) -> Result<()> {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("{x} must be finite and positive")))
            }
        }
        match self {
            SpectralDensity::Markovian { gamma_tilde } => nonneg("bath.gamma_tilde", *gamma_tilde),
            SpectralDensity::Lorentzian { g, gamma, delta_c } => {
                nonneg("bath.g", *g)?;
                positive("bath.gamma", *gamma)?;
                if !delta_c.is_finite() {
                    return Err(Error::config("bath.delta_c", "must be finite"));
                }
                Ok(())
            }
            SpectralDensity::Ohmic { g, s, omega_c, omega_eg } => {
                nonneg("bath.g", *g)?;
                positive("bath.S", *s)?;
                positive("bath.omega_c", *omega_c)?;
                positive("bath.omega_eg", *omega_eg)
            }
            SpectralDensity::Tabulated(_) => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SpectralDensity::Markovian { .. } => "markovian",
            SpectralDensity::Lorentzian { .. } => "lorentzian",
            SpectralDensity::Ohmic { .. } => "ohmic",
            SpectralDensity::Tabulated(_) => "tabulated",
        }
    }

    /// B(s) is a rational function (constant or single pole).
    pub fn is_rational(&self) -> bool {
        matches!(self, SpectralDensity::Markovian { .. } | SpectralDensity::Lorentzian { .. })
    }

    /// The swept coupling: γ̃ for Markovian, g otherwise. `None` for tabulated data.
    pub fn coupling(&self) -> Option<f64> {
        match self {
            SpectralDensity::Markovian { gamma_tilde } => Some(*gamma_tilde),
            SpectralDensity::Lorentzian { g, .. } | SpectralDensity::Ohmic { g, .. } => Some(*g),
            SpectralDensity::Tabulated(_) => None,
        }
    }

    pub fn with_coupling(&self, x: f64) -> Result<Self> {
        let mut d = self.clone();
        match &mut d {
            SpectralDensity::Markovian { gamma_tilde } => *gamma_tilde = x,
            SpectralDensity::Lorentzian { g, .. } | SpectralDensity::Ohmic { g, .. } => *g = x,
            SpectralDensity::Tabulated(_) => {
                return Err(Error::Unsupported("tabulated densities have no coupling parameter".into()))
            }
        }
        d.validate()?;
        Ok(d)
    }

    /// J as a function of detuning `Δ = ω − ω_eg'`. Markovian has no density.
    pub fn at_detuning(&self, delta: f64) -> Option<f64> {
        match self {
            SpectralDensity::Markovian { .. } => None,
            SpectralDensity::Lorentzian { g, gamma, delta_c } => {
                let x = delta - delta_c;
                Some(g * g * gamma / (2.0 * std::f64::consts::PI) / (x * x + 0.25 * gamma * gamma))
            }
            SpectralDensity::Ohmic { g, s, omega_c, omega_eg } => {
                let w = delta + omega_eg;
                if w <= 0.0 {
                    return Some(0.0);
                }
                let x = w / omega_c;
                Some(ohmic_normalization(*s, *omega_c) * g * g * omega_c * x.powf(*s) * (-x).exp())
            }
            SpectralDensity::Tabulated(t) => Some(t.eval(delta + t.omega_eg_prime)),
        }
    }

    /// Interval of detunings carrying the density; the Lorentzian one is truncated.
    pub fn default_support(&self) -> Option<(f64, f64)> {
        match self {
            SpectralDensity::Markovian { .. } => None,
            SpectralDensity::Lorentzian { gamma, delta_c, .. } => Some((
                delta_c - LORENTZIAN_SUPPORT_WIDTHS * gamma,
                delta_c + LORENTZIAN_SUPPORT_WIDTHS * gamma,
            )),
            SpectralDensity::Ohmic { omega_c, omega_eg, .. } => {
                Some((-omega_eg, -omega_eg + OHMIC_SUPPORT_CUTOFFS * omega_c))
            }
            SpectralDensity::Tabulated(t) => {
                let w = t.omega();
                Some((w[0] - t.omega_eg_prime, w[w.len() - 1] - t.omega_eg_prime))
            }
        }
    }

    /// ∫J over all frequencies.
    pub fn total_weight(&self) -> Option<f64> {
        match self {
            SpectralDensity::Markovian { .. } => None,
            SpectralDensity::Lorentzian { g, .. } | SpectralDensity::Ohmic { g, .. } => Some(g * g),
            SpectralDensity::Tabulated(t) => Some(t.total_weight()),
        }
    }

    pub(crate) fn scaled(&self, by: f64) -> Self {
        match self {
            SpectralDensity::Markovian { gamma_tilde } => SpectralDensity::Markovian {
                gamma_tilde: gamma_tilde / by,
            },
            SpectralDensity::Lorentzian { g, gamma, delta_c } => SpectralDensity::Lorentzian {
                g: g / by,
                gamma: gamma / by,
                delta_c: delta_c / by,
            },
            SpectralDensity::Ohmic { g, s, omega_c, omega_eg } => SpectralDensity::Ohmic {
                g: g / by,
                s: *s,
                omega_c: omega_c / by,
                omega_eg: omega_eg / by,
            },
            SpectralDensity::Tabulated(t) => SpectralDensity::Tabulated(t.scaled(by)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spacing {
    Uniform,
    Log,
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl TimeGrid {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::config("run.points", "time grid is empty"));
        }
        if points.iter().any(|t| !t.is_finite()) || points[0] < 0.0 {
            return Err(Error::config("run.points", "times must be finite and nonnegative"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("run.points", "times must be strictly increasing"));
        }
        Ok(TimeGrid {
            points,
            spacing: Spacing::Custom,
        })
    }

    /// `n` points from `t0` to `t1` inclusive.
    pub fn uniform(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if n < 2 {
            if n == 1 {
                return TimeGrid::from_points(vec![t0]);
            }
            return Err(Error::config("run.points", "need at least one point"));
        }
        if !(t1 > t0) {
            return Err(Error::config("run.tmax", format!("tmax = {t1} must exceed {t0}")));
        }
        let h = (t1 - t0) / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|k| t0 + k as f64 * h).collect();
        pts[n - 1] = t1;
        let mut g = TimeGrid::from_points(pts)?;
        g.spacing = Spacing::Uniform;
        Ok(g)
    }

    pub fn log(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if !(t0 > 0.0 && t1 > t0) || n < 2 {
            return Err(Error::config("run.points", "log grid needs 0 < t0 < t1 and n >= 2"));
        }
        let (a, b) = (t0.ln(), t1.ln());
        let mut pts: Vec<f64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect();
        pts[0] = t0;
        pts[n - 1] = t1;
        let mut g = TimeGrid::from_points(pts)?;
        g.spacing = Spacing::Log;
        Ok(g)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Step of a uniform grid starting at zero.
    pub fn uniform_step(&self) -> Option<f64> {
        let p = &self.points;
        if p.len() < 2 || p[0] != 0.0 {
            return None;
        }
        let h = p[1] - p[0];
        let ok = p.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.max(1.0));
        ok.then_some(h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    LaplaceTalbot,
    LaplaceFourier,
    Volterra,
    DiscretizedBath,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTrace {
    pub grid: TimeGrid,
    pub c1_tilde: Vec<Complex64>,
    pub c2_tilde: Option<Vec<Complex64>>,
    pub p1: Vec<f64>,
    pub method: Method,
    /// Per-point absolute error estimate on c̃₁, where the engine provides one.
    pub error_estimate: Vec<f64>,
    pub warnings: Vec<String>,
    /// Results beyond this time are not trustworthy (bath recurrence).
    pub valid_until: Option<f64>,
}

impl AmplitudeTrace {
    pub fn new(grid: TimeGrid, c1_tilde: Vec<Complex64>, method: Method) -> Self {
        let p1 = c1_tilde.iter().map(|c| c.norm_sqr()).collect();
        let n = c1_tilde.len();
        AmplitudeTrace {
            grid,
            c1_tilde,
            c2_tilde: None,
            p1,
            method,
            error_estimate: vec![0.0; n],
            warnings: Vec::new(),
            valid_until: None,
        }
    }

    pub fn times(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn max_error_estimate(&self) -> f64 {
        self.error_estimate.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayCurve {
    pub coupling_grid: Vec<f64>,
    pub gamma_eff_tau: Vec<f64>,
    pub tau_used: f64,
    /// Centered differences; NaN at the two ends.
    pub derivative: Vec<f64>,
}

impl DecayCurve {
    pub fn new(coupling_grid: Vec<f64>, gamma_eff_tau: Vec<f64>, tau_used: f64) -> Self {
        let n = coupling_grid.len();
        let mut derivative = vec![f64::NAN; n];
        for k in 1..n.saturating_sub(1) {
            derivative[k] =
                (gamma_eff_tau[k + 1] - gamma_eff_tau[k - 1]) / (coupling_grid[k + 1] - coupling_grid[k - 1]);
        }
        DecayCurve {
            coupling_grid,
            gamma_eff_tau,
            tau_used,
            derivative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeakClass {
    SharpPeak,
    SmoothPeak,
    MonotoneDecreasing,
    NoPeak,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpReport {
    pub peak_coupling: f64,
    pub peak_value: f64,
    pub classification: PeakClass,
    /// Change of slope across the maximum.
    pub derivative_jump: f64,
    /// `derivative_jump` over the neighbouring curvature scale.
    pub jump_ratio: f64,
    pub jump_threshold: f64,
    pub grid_resolution: f64,
    /// Pole-based location of the decay-rate maximum, for rational kernels.
    pub cross_check: Option<f64>,
    pub tau: f64,
    pub provenance: String,
}
