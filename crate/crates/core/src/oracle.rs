//! Brute-force validators for the closed-form pipeline: a fixed-step RK4
//! integration of the moment equation, adaptive quadrature of R₂, direct
//! series sums over the Gaussian spectrum and the master-equation residual.

use nalgebra::{Matrix4, Vector4};

use crate::coefficients::MarkovCoefficients;
use crate::propagator::{symmetrize, symplectic_form, Covariance4, DriftMatrix, Frame, Propagator};
use crate::{Error, Result, HBAR, MASS, OMEGA};

/// dQ/dt = −MᵀQ − QM + R_sym.
pub fn moment_rhs(q: &Matrix4<f64>, m: &DriftMatrix, r_sym: &Matrix4<f64>) -> Matrix4<f64> {
    symmetrize(&(-(m.0.transpose() * q) - q * m.0 + r_sym))
}

/// `steps` classic fourth-order Runge-Kutta steps of size `h`.
pub fn rk4_fixed<F>(q0: &Matrix4<f64>, h: f64, steps: usize, rhs: F) -> Matrix4<f64>
where
    F: Fn(&Matrix4<f64>) -> Matrix4<f64>,
{
    let mut q = *q0;
    for _ in 0..steps {
        let k1 = rhs(&q);
        let k2 = rhs(&(q + k1 * (h / 2.0)));
        let k3 = rhs(&(q + k2 * (h / 2.0)));
        let k4 = rhs(&(q + k3 * h));
        q += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    }
    q
}

/// Largest accepted RK4 step: 1e−3 / max(Ω, ω_d, ω_c, 2λ).
pub fn step_bound(coeffs: &MarkovCoefficients) -> f64 {
    let rates = [OMEGA, coeffs.omega_d(), coeffs.omega_c(), 2.0 * coeffs.lambda.abs()];
    1e-3 / rates.iter().filter(|r| r.is_finite()).fold(0.0f64, |a, &b| a.max(b))
}

/// Integrates the moment equation from σ₀ to `t_end` with steps no larger than
/// `dt`, in the quadratic-form representation.
pub fn integrate_moments(prop: &Propagator, sigma0: &Covariance4, t_end: f64, dt: f64) -> Result<Covariance4> {
    let mut out = integrate_moments_checkpoints(prop, sigma0, &[t_end], dt)?;
    Ok(out.remove(0))
}

/// Like [`integrate_moments`] but returns the state at each of the increasing
/// `times`, continuing one trajectory through all of them.
pub fn integrate_moments_checkpoints(
    prop: &Propagator,
    sigma0: &Covariance4,
    times: &[f64],
    dt: f64,
) -> Result<Vec<Covariance4>> {
    sigma0.expect_frame(Frame::Cmr)?;
    let bound = step_bound(&prop.coeffs);
    if !(dt > 0.0) || dt > bound {
        return Err(Error::StepSize { dt, bound });
    }
    let r_sym = prop.kernel.r_sym();
    let rhs = |q: &Matrix4<f64>| moment_rhs(q, &prop.drift, &r_sym);
    let mut q = sigma0.quadratic_form();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= now && t.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "checkpoint times must be finite, >= 0 and increasing, got {t} after {now}"
            )));
        }
        let steps = ((t - now) / dt).ceil() as usize;
        if steps > 0 {
            q = rk4_fixed(&q, (t - now) / steps as f64, steps, rhs);
        }
        now = t;
        out.push(Covariance4::from_quadratic_form(&q, Frame::Cmr));
    }
    Ok(out)
}

fn simpson<F: Fn(f64) -> Matrix4<f64>>(f: &F, a: f64, fa: &Matrix4<f64>, b: f64, fb: &Matrix4<f64>) -> (Matrix4<f64>, f64, Matrix4<f64>) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F: Fn(f64) -> Matrix4<f64>>(
    f: &F,
    a: f64,
    fa: &Matrix4<f64>,
    b: f64,
    fb: &Matrix4<f64>,
    whole: &Matrix4<f64>,
    m: f64,
    fm: &Matrix4<f64>,
    tol: f64,
    depth: u32,
) -> Matrix4<f64> {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.amax() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, fa, m, fm, &left, lm, &flm, tol / 2.0, depth - 1)
        + adaptive_simpson(f, m, fm, b, fb, &right, rm, &frm, tol / 2.0, depth - 1)
}

/// Adaptive-Simpson quadrature of a matrix-valued integrand on [a, b].
pub fn integrate_matrix<F: Fn(f64) -> Matrix4<f64>>(f: F, a: f64, b: f64, tol: f64) -> Matrix4<f64> {
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(&f, a, &fa, b, &fb);
    adaptive_simpson(&f, a, &fa, b, &fb, &whole, m, &fm, tol, 40)
}

/// R₂(t) = ∫₀ᵗ e^{Mᵀ(s−t)} R_sym e^{M(s−t)} ds with the matrix exponential
/// taken from nalgebra's Padé scheme rather than the spectral projectors.
pub fn r2_quadrature(prop: &Propagator, t: f64, tol: f64) -> Matrix4<f64> {
    let m = prop.drift.0;
    let r = prop.kernel.r_sym();
    let integrand = |s: f64| {
        let e = (m * (s - t)).exp();
        e.transpose() * r * e
    };
    symmetrize(&integrate_matrix(integrand, 0.0, t, tol))
}

/// Occupation-basis eigenvalue λ_N of a single thermal mode with symplectic
/// eigenvalue ν; negative ratios appear for ν < 1 after partial transposition.
pub fn thermal_weight(nu: f64, n: u32) -> f64 {
    2.0 / (nu + 1.0) * ((nu - 1.0) / (nu + 1.0)).powi(n as i32)
}

/// −Σ λ_{N₁N₂} ln λ_{N₁N₂} over N₁, N₂ ≤ n_max.
pub fn entropy_series(nu1: f64, nu2: f64, n_max: u32) -> f64 {
    let mut s = 0.0;
    for n1 in 0..=n_max {
        let l1 = thermal_weight(nu1, n1);
        for n2 in 0..=n_max {
            let l = l1 * thermal_weight(nu2, n2);
            if l > 0.0 {
                s -= l * l.ln();
            }
        }
    }
    s
}

/// Σ |λ_{N₁N₂}| over the partially transposed spectrum.
pub fn schatten_series(nu1: f64, nu2: f64, n_max: u32) -> f64 {
    let mut s = 0.0;
    for n1 in 0..=n_max {
        let l1 = thermal_weight(nu1, n1).abs();
        for n2 in 0..=n_max {
            s += l1 * thermal_weight(nu2, n2).abs();
        }
    }
    s
}

/// Symplectic eigenvalues from the invariants of N = −(Ωσ)²: its eigenvalues
/// are ν₁², ν₁², ν₂², ν₂², so s = tr N / 2 and q = (s² − tr N²/2)/2 are the
/// sum and product of ν₁², ν₂². Independent of the Cholesky/SVD route.
pub fn symplectic_eigenvalues_invariants(sigma: &Covariance4) -> (f64, f64) {
    let os = symplectic_form() * sigma.sigma();
    let n = -(os * os);
    let s = n.trace() / 2.0;
    let q = (s * s - (n * n).trace() / 2.0) / 2.0;
    let big = (s + (s * s - 4.0 * q).max(0.0).sqrt()) / 2.0;
    ((q / big).sqrt(), big.sqrt())
}

/// Tr ρ² = 1/√det σ, the Gaussian overlap formula.
pub fn purity_det(sigma: &Covariance4) -> f64 {
    1.0 / sigma.sigma().determinant().sqrt()
}

/// Residual of the rewritten master equation
/// ∂ρ/∂t + (ħK/(2m) + 2λΔ)∂ρ/∂Δ − (2mω_c²Δ/ħ)∂ρ/∂K + (2ħk/m)∂ρ/∂δ − (mω_d²δ/(2ħ))∂ρ/∂k
///   = (2D_px ΔK − D_pp Δ²/ħ) ρ
/// for ρ = exp(−wᵀQ(t)w), every derivative taken analytically. Returned
/// relative to the largest term.
pub fn master_equation_residual(prop: &Propagator, sigma0: &Covariance4, w: &Vector4<f64>, t: f64) -> Result<f64> {
    let q0 = sigma0.quadratic_form();
    let q = prop.evolve_quadratic_form(&q0, t)?;
    let q_dot = prop.quadratic_form_rate(&q0, t)?;
    let c = &prop.coeffs;
    let m = MASS;
    let (dd, kk, d, k) = (w[0], w[1], w[2], w[3]);

    let rho = (-(w.transpose() * q * w)[(0, 0)]).exp();
    let grad = -2.0 * q * w * rho;
    let terms = [
        -(w.transpose() * q_dot * w)[(0, 0)] * rho,
        (HBAR * kk / (2.0 * m) + 2.0 * c.lambda * dd) * grad[0],
        -(2.0 * m * c.omega_c_sq * dd / HBAR) * grad[1],
        (2.0 * HBAR * k / m) * grad[2],
        -(m * c.omega_d_sq * d / (2.0 * HBAR)) * grad[3],
        -(2.0 * c.d_px * dd * kk - c.d_pp * dd * dd / HBAR) * rho,
    ];
    let scale = terms.iter().fold(f64::MIN_POSITIVE, |a, v| a.max(v.abs()));
    Ok(terms.iter().sum::<f64>().abs() / scale)
}
