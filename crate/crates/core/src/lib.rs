//! Two coupled qubits, one of them damped by a structured reservoir.
//!
//! Single-excitation dynamics through Laplace-domain amplitudes, a Volterra
//! solver and a discretized bath; long-time decay rates and their peak
//! structure locate exceptional points and Zeno onsets.

pub mod analysis;
mod config;
pub mod error;
pub mod gamma;
pub mod kernel;
pub mod laplace;
pub mod markovian;
pub mod model;
pub mod quad;
pub mod timedomain;

pub use error::{Error, Result};
