//! Two-mode Gaussian information quantities: frame map, symplectic spectra,
//! entropies, partial transpose and logarithmic negativity.
//!
//! Entropies are in nats, the logarithmic negativity in bits.

use std::f64::consts::LN_2;

use nalgebra::{Matrix2, Matrix4};
use serde::Serialize;

use crate::propagator::{symplectic_form, Covariance4, Frame};
use crate::{Error, Result};

/// (X, P, x, p) → (x₁, p₁, x₂, p₂).
pub fn w_matrix() -> Matrix4<f64> {
    Matrix4::new(
        1.0, 0.0, 0.5, 0.0, //
        0.0, 0.5, 0.0, 1.0, //
        1.0, 0.0, -0.5, 0.0, //
        0.0, 0.5, 0.0, -1.0,
    )
}

pub fn w_inverse() -> Matrix4<f64> {
    Matrix4::new(
        0.5, 0.0, 0.5, 0.0, //
        0.0, 1.0, 0.0, 1.0, //
        1.0, 0.0, -1.0, 0.0, //
        0.0, 0.5, 0.0, -0.5,
    )
}

pub fn cmr_to_lab(sigma_c: &Covariance4) -> Result<Covariance4> {
    sigma_c.expect_frame(Frame::Cmr)?;
    let w = w_matrix();
    Ok(Covariance4::from_symmetrized(w * sigma_c.sigma() * w.transpose(), Frame::Lab))
}

pub fn lab_to_cmr(sigma: &Covariance4) -> Result<Covariance4> {
    sigma.expect_frame(Frame::Lab)?;
    let wi = w_inverse();
    Ok(Covariance4::from_symmetrized(wi * sigma.sigma() * wi.transpose(), Frame::Cmr))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymplecticSpectrum {
    pub nu1: f64,
    pub nu2: f64,
}

/// Positive eigenvalues of iΩσ. With σ = LLᵀ the antisymmetric matrix LᵀΩL
/// has singular values ν₁, ν₁, ν₂, ν₂; this stays accurate at degenerate
/// spectra where the characteristic-polynomial route loses half the digits.
pub fn symplectic_eigenvalues(sigma: &Covariance4) -> Result<SymplecticSpectrum> {
    let l = sigma
        .sigma()
        .cholesky()
        .ok_or_else(|| Error::NonPhysicalSpectrum("covariance is not positive-definite".into()))?
        .l();
    let mut sv: Vec<f64> = (l.transpose() * symplectic_form() * l).singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    if !(sv[0] > 0.0) {
        return Err(Error::NonPhysicalSpectrum(format!("symplectic eigenvalue {:e}", sv[0])));
    }
    Ok(SymplecticSpectrum {
        nu1: 0.5 * (sv[0] + sv[1]),
        nu2: 0.5 * (sv[2] + sv[3]),
    })
}

pub fn positivity_check(spectrum: &SymplecticSpectrum, tol: f64) -> bool {
    spectrum.nu1 > 1.0 - tol && spectrum.nu2 > 1.0 - tol
}

pub fn purity(spectrum: &SymplecticSpectrum) -> f64 {
    1.0 / (spectrum.nu1 * spectrum.nu2)
}

// Single-mode entropy plus ln 2: ½(1+ν)ln(1+ν) + ½(1−ν)ln(ν−1).
fn mode_entropy_shifted(nu: f64, tol: f64) -> Result<f64> {
    if !(nu >= 1.0 - tol) {
        return Err(Error::Domain(format!("entropy undefined for symplectic eigenvalue {nu}")));
    }
    let nu = nu.max(1.0);
    let x = nu - 1.0;
    let tail = if x <= 0.0 { 0.0 } else { -0.5 * x * x.ln() };
    Ok(0.5 * (1.0 + nu) * (1.0 + nu).ln() + tail)
}

pub fn entropy_total(spectrum: &SymplecticSpectrum, tol: f64) -> Result<f64> {
    Ok(mode_entropy_shifted(spectrum.nu1, tol)? + mode_entropy_shifted(spectrum.nu2, tol)? - 2.0 * LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

pub fn reduced_block(sigma: &Covariance4, subsystem: Subsystem) -> Result<Matrix2<f64>> {
    sigma.expect_frame(Frame::Lab)?;
    let i = match subsystem {
        Subsystem::A => 0,
        Subsystem::B => 2,
    };
    Ok(sigma.sigma().fixed_view::<2, 2>(i, i).into_owned())
}

/// ν_X = √det σ_X.
pub fn reduced_eigenvalue(sigma: &Covariance4, subsystem: Subsystem) -> Result<f64> {
    let det = reduced_block(sigma, subsystem)?.determinant();
    if !(det > 0.0) {
        return Err(Error::NonPhysicalSpectrum(format!("reduced block determinant {det:e}")));
    }
    Ok(det.sqrt())
}

pub fn entropy_sub(sigma: &Covariance4, subsystem: Subsystem, tol: f64) -> Result<f64> {
    Ok(mode_entropy_shifted(reduced_eigenvalue(sigma, subsystem)?, tol)? - LN_2)
}

/// C_ξ = S_A + S_B − S_{A+B}, clipped to zero within tol below.
pub fn mutual_information(sigma: &Covariance4, tol: f64) -> Result<f64> {
    let total = entropy_total(&symplectic_eigenvalues(sigma)?, tol)?;
    let c = entropy_sub(sigma, Subsystem::A, tol)? + entropy_sub(sigma, Subsystem::B, tol)? - total;
    Ok(clip_small_negative(c, tol))
}

fn clip_small_negative(v: f64, tol: f64) -> f64 {
    if v < 0.0 && v >= -tol {
        0.0
    } else {
        v
    }
}

/// τστ with τ = diag(1, 1, 1, −1): k₂ → −k₂.
pub fn partial_transpose(sigma: &Covariance4) -> Result<Covariance4> {
    sigma.expect_frame(Frame::Lab)?;
    let tau = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    Ok(Covariance4::from_symmetrized(tau * sigma.sigma() * tau, Frame::Lab))
}

/// Trace norm of the partially transposed state from its symplectic spectrum.
pub fn schatten_norm(pt: &SymplecticSpectrum) -> f64 {
    let f = |nu: f64| (nu - 1.0).abs() - (1.0 + nu);
    4.0 / (f(pt.nu1) * f(pt.nu2))
}

/// E_N = log₂ ‖ρ^{T_B}‖₁; zero whenever ν̃₁ ≥ 1 − tol.
pub fn log_negativity(sigma: &Covariance4, tol: f64) -> Result<f64> {
    let pt = symplectic_eigenvalues(&partial_transpose(sigma)?)?;
    Ok(log_negativity_from_pt(&pt, tol))
}

pub fn log_negativity_from_pt(pt: &SymplecticSpectrum, tol: f64) -> f64 {
    if pt.nu1 >= 1.0 - tol {
        0.0
    } else {
        schatten_norm(pt).log2().max(0.0)
    }
}

/// p·σ_EPR in the CMR frame.
pub fn epr_initial(p: f64, r_s: f64) -> Result<Covariance4> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("p must be >= 1, got {p}")));
    }
    if !r_s.is_finite() {
        return Err(Error::InvalidInput(format!("r_s must be finite, got {r_s}")));
    }
    let (c, s) = ((2.0 * r_s).cosh(), (2.0 * r_s).sinh());
    let m = Matrix4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s, //
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    );
    Covariance4::new(p * m, Frame::Cmr)
}

/// Lab-frame two-mode squeezed vacuum with squeezing r.
pub fn two_mode_squeezed(r: f64) -> Covariance4 {
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    Covariance4::from_symmetrized(
        Matrix4::new(
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ),
        Frame::Lab,
    )
}

/// Every Gaussian information quantity at one time. Entropies are `None` when
/// the spectrum is not physical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoReport {
    pub t: f64,
    pub nu1: f64,
    pub nu2: f64,
    #[serde(rename = "nuA")]
    pub nu_a: f64,
    #[serde(rename = "nuB")]
    pub nu_b: f64,
    pub nu1_pt: f64,
    pub purity: f64,
    #[serde(rename = "S_total")]
    pub s_total: Option<f64>,
    #[serde(rename = "S_A")]
    pub s_a: Option<f64>,
    #[serde(rename = "S_B")]
    pub s_b: Option<f64>,
    #[serde(rename = "C_xi")]
    pub c_xi: Option<f64>,
    #[serde(rename = "E_N")]
    pub e_n: f64,
    pub positive: bool,
    pub separable: bool,
}

impl InfoReport {
    /// Column names in output order.
    pub const FIELDS: [&'static str; 14] = [
        "t", "nu1", "nu2", "nuA", "nuB", "nu1_pt", "purity", "S_total", "S_A", "S_B", "C_xi", "E_N",
        "positive", "separable",
    ];

    pub fn compute(t: f64, sigma_c: &Covariance4, tol: f64) -> Result<Self> {
        let lab = cmr_to_lab(sigma_c)?;
        let spectrum = symplectic_eigenvalues(&lab)?;
        let nu_a = reduced_eigenvalue(&lab, Subsystem::A)?;
        let nu_b = reduced_eigenvalue(&lab, Subsystem::B)?;
        let pt = symplectic_eigenvalues(&partial_transpose(&lab)?)?;
        let positive = positivity_check(&spectrum, tol);

        let shifted = |nu: f64| mode_entropy_shifted(nu, tol).ok();
        let s_total = match (shifted(spectrum.nu1), shifted(spectrum.nu2)) {
            (Some(a), Some(b)) if positive => Some(a + b - 2.0 * LN_2),
            _ => None,
        };
        let s_a = shifted(nu_a).map(|v| v - LN_2);
        let s_b = shifted(nu_b).map(|v| v - LN_2);
        let c_xi = match (s_a, s_b, s_total) {
            (Some(a), Some(b), Some(ab)) => Some(clip_small_negative(a + b - ab, tol)),
            _ => None,
        };
        Ok(InfoReport {
            t,
            nu1: spectrum.nu1,
            nu2: spectrum.nu2,
            nu_a,
            nu_b,
            nu1_pt: pt.nu1,
            purity: purity(&spectrum),
            s_total,
            s_a,
            s_b,
            c_xi,
            e_n: log_negativity_from_pt(&pt, tol),
            positive,
            separable: pt.nu1 >= 1.0 - tol,
        })
    }

    /// Numeric value of a named field; flags map to 0/1, missing entropies to NaN.
    pub fn get(&self, name: &str) -> Option<f64> {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
        Some(match name {
            "t" => self.t,
            "nu1" => self.nu1,
            "nu2" => self.nu2,
            "nuA" => self.nu_a,
            "nuB" => self.nu_b,
            "nu1_pt" => self.nu1_pt,
            "purity" => self.purity,
            "S_total" => opt(self.s_total),
            "S_A" => opt(self.s_a),
            "S_B" => opt(self.s_b),
            "C_xi" => opt(self.c_xi),
            "E_N" => self.e_n,
            "positive" => flag(self.positive),
            "separable" => flag(self.separable),
            _ => return None,
        })
    }
}
