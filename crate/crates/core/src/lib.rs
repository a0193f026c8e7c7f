//! Exact Markovian dynamics of two harmonically coupled oscillators sharing an
//! Ohmic (Lorentz-Drude) bath.
//!
//! Everything is dimensionless with ħ = m = Ω = 1: frequencies are in units of
//! the bare oscillator frequency Ω, temperatures are k_BT/(ħΩ) and couplings
//! κ are in units of mΩ².
//!
//! The pipeline is
//! [`special`] (cubic roots, digamma) →
//! [`coefficients`] (A, B, C, D in the six regimes) →
//! [`propagator`] (drift spectrum, diffusion kernel, closed-form evolution) →
//! [`gaussian`] (symplectic spectra, entropies, negativity) →
//! [`scenario`] (time sweeps and transition detection).
//! [`oracle`] holds the brute-force moment integrator used for validation.

pub mod coefficients;
pub mod error;
pub mod gaussian;
pub mod oracle;
pub mod output;
pub mod propagator;
pub mod scenario;
pub mod special;

pub use error::{Error, ErrorClass, Result};

/// Reduced Planck constant.
pub const HBAR: f64 = 1.0;
/// Single-oscillator mass m.
pub const MASS: f64 = 1.0;
/// Bare oscillator frequency Ω.
pub const OMEGA: f64 = 1.0;
/// Centre-of-mass mass M = 2m.
pub const CM_MASS: f64 = 2.0 * MASS;

/// Default tolerance for positivity and separability verdicts.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
