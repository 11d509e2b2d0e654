//! The Markovian-damped pair in closed form.
//!
//! The damped qubit's upper level acquires `−iγ̃/2`; within the single-excitation
//! block `{|e⟩₁|g⟩₂, |g⟩₁|e⟩₂}` the Hamiltonian is `[[E_a, 𝒥], [𝒥, E_b − iγ̃/2]]`.

use num_complex::Complex64;
use serde::Serialize;

use crate::model::SystemConfig;

/// Width of the window around γ̃ = 4𝒥 where the degenerate form is used.
pub const DEGENERACY_WINDOW: f64 = 1e-8;
/// |ε| below this counts as zero detuning.
pub const EP_DETUNING_TOL: f64 = 1e-10;

/// c̃₁(t) for identical qubits (ε = 0) starting with the excitation on qubit 1.
pub fn c1_closed_form(t: f64, gamma_tilde: f64, j: f64) -> Complex64 {
    let q = 0.25 * gamma_tilde;
    let gap = gamma_tilde - 4.0 * j;
    let v = if gap.abs() < DEGENERACY_WINDOW * j {
        (-q * t).exp() * (1.0 + q * t)
    } else if gap < 0.0 {
        let omega = (16.0 * j * j - gamma_tilde * gamma_tilde).sqrt();
        let x = 0.25 * omega * t;
        (-q * t).exp() * (x.cos() + gamma_tilde / omega * x.sin())
    } else {
        // cos(ix) = cosh x, written as two decaying exponentials.
        let kappa = (gamma_tilde * gamma_tilde - 16.0 * j * j).sqrt();
        let r = gamma_tilde / kappa;
        0.5 * ((1.0 + r) * (0.25 * (kappa - gamma_tilde) * t).exp()
            + (1.0 - r) * (-0.25 * (kappa + gamma_tilde) * t).exp())
    };
    Complex64::new(v, 0.0)
}

/// γ̃ at the exceptional point, in units of 𝒥: 4 when the qubits are resonant, none otherwise.
pub fn markovian_ep_condition(epsilon: f64) -> Option<f64> {
    (epsilon.abs() < EP_DETUNING_TOL).then_some(4.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenSystem {
    /// Ground and doubly excited levels; only defined when absolute energies are known.
    pub lambda1: Option<Complex64>,
    pub lambda2: Option<Complex64>,
    pub lambda3: Complex64,
    pub lambda4: Complex64,
    /// `(x, 1)` in the `{|e⟩₁|g⟩₂, |g⟩₁|e⟩₂}` basis.
    pub phi3: [Complex64; 2],
    pub phi4: [Complex64; 2],
    /// |⟨φ₃|φ₄⟩|/(‖φ₃‖‖φ₄‖).
    pub overlap: f64,
    /// (4𝒥)² − (γ̃ + 2iε)².
    pub discriminant: Complex64,
    /// The 2×2 single-excitation block.
    pub block: [[Complex64; 2]; 2],
}

/// Eigenvalues and eigenvectors with damping γ̃.
///
/// Without `system.energies` the block is written in the frame `E_a = 0`, `E_b = ε`.
pub fn eigensystem(system: &SystemConfig, gamma_tilde: f64) -> EigenSystem {
    let j = system.coupling_j;
    let damp = Complex64::new(system.lamb_shift, -0.5 * gamma_tilde);
    let (ea, eb, l1, l2) = match &system.energies {
        Some(e) => (
            e.omega_e + e.omega_g_prime,
            e.omega_g + e.omega_e_prime,
            Some(Complex64::new(e.omega_g + e.omega_g_prime, 0.0)),
            Some(Complex64::new(e.omega_e + e.omega_e_prime, 0.0) + damp),
        ),
        None => (0.0, system.epsilon, None, None),
    };
    let a = Complex64::new(ea, 0.0);
    let b = Complex64::new(eb, 0.0) + damp;
    let half_trace = 0.5 * (a + b);
    let d = a - b;
    // (a − b)² + 4𝒥² = ¼[(4𝒥)² − (γ̃ + 2iε)²] when the Lamb shift is off.
    let disc4 = 4.0 * (d * d + 4.0 * j * j);
    let root = 0.25 * disc4.sqrt();
    let lambda3 = half_trace - root;
    let lambda4 = half_trace + root;
    let phi = |l: Complex64| [(l - b) / j, Complex64::new(1.0, 0.0)];
    let phi3 = phi(lambda3);
    let phi4 = phi(lambda4);
    let inner = phi3[0].conj() * phi4[0] + phi3[1].conj() * phi4[1];
    let n3 = (phi3[0].norm_sqr() + phi3[1].norm_sqr()).sqrt();
    let n4 = (phi4[0].norm_sqr() + phi4[1].norm_sqr()).sqrt();
    let jj = Complex64::new(j, 0.0);
    EigenSystem {
        lambda1: l1,
        lambda2: l2,
        lambda3,
        lambda4,
        phi3,
        phi4,
        overlap: (inner.norm() / (n3 * n4)).min(1.0),
        discriminant: disc4,
        block: [[a, jj], [jj, b]],
    }
}
