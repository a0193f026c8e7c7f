//! Closed-form evolution of the characteristic function in centre-of-mass /
//! relative (CMR) phase-space variables w = (Δ, K, δ, k).
//!
//! A zero-mean Gaussian state is carried as the quadratic form Q of
//! ρ_c(w) = exp(−wᵀQw), Q = ¼ Ωᵀ σ Ω. Under the Markovian master equation
//!
//! Q(t) = (e^{−Mt})ᵀ Q(0) e^{−Mt} + R₂(t),
//! R₂(t) = Σ_{k,ℓ∈{1,2}} P_kᵀ R P_ℓ (1 − e^{−(Λ_k+Λ_ℓ)t}) / (Λ_k+Λ_ℓ),
//!
//! which is the solution of dQ/dt = −MᵀQ − QM + R. The transpose sits on the
//! left projector because wᵀ e^{−Mᵀu} R e^{−Mu} w is the exponent being
//! accumulated along the characteristics.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::MarkovCoefficients;
use crate::{Error, Result, HBAR, MASS};

const REALNESS_TOL: f64 = 1e-10;
const CONFLUENCE_TOL: f64 = 1e-10;

type CMatrix4 = Matrix4<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// (X, P, x, p) ordering, variables (Δ, K, δ, k).
    Cmr,
    /// (x₁, p₁, x₂, p₂) ordering.
    Lab,
}

/// The 4×4 two-mode symplectic form diag(Ω₁, Ω₁), Ω₁ = [[0, 1], [−1, 0]].
pub fn symplectic_form() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Symmetric second-moment matrix σᵢⱼ = ⟨{r̂ᵢ, r̂ⱼ}⟩ tagged with its frame.
/// The vacuum is the identity in this convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covariance4 {
    sigma: Matrix4<f64>,
    frame: Frame,
}

impl Covariance4 {
    /// Validated constructor: symmetric to 1e-12 (relative) and positive-definite.
    pub fn new(sigma: Matrix4<f64>, frame: Frame) -> Result<Self> {
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("covariance has non-finite entries".into()));
        }
        let scale = sigma.amax().max(1.0);
        if (sigma - sigma.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidInput("covariance is not symmetric".into()));
        }
        let sym = symmetrize(&sigma);
        if sym.cholesky().is_none() {
            return Err(Error::InvalidInput("covariance is not positive-definite".into()));
        }
        Ok(Covariance4 { sigma: sym, frame })
    }

    /// Symmetrizes without the positivity check. Used for evolved states, whose
    /// physicality is judged from the symplectic spectrum instead.
    pub fn from_symmetrized(sigma: Matrix4<f64>, frame: Frame) -> Self {
        Covariance4 {
            sigma: symmetrize(&sigma),
            frame,
        }
    }

    pub fn sigma(&self) -> &Matrix4<f64> {
        &self.sigma
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn expect_frame(&self, frame: Frame) -> Result<()> {
        if self.frame != frame {
            return Err(Error::FrameMismatch {
                expected: frame,
                got: self.frame,
            });
        }
        Ok(())
    }

    /// Q = ¼ Ωᵀ σ Ω, so that the characteristic function is exp(−wᵀQw).
    pub fn quadratic_form(&self) -> Matrix4<f64> {
        let om = symplectic_form();
        symmetrize(&(0.25 * om.transpose() * self.sigma * om))
    }

    /// Inverse of [`Covariance4::quadratic_form`]: σ = 4 Ω Q Ωᵀ.
    pub fn from_quadratic_form(q: &Matrix4<f64>, frame: Frame) -> Self {
        let om = symplectic_form();
        Covariance4::from_symmetrized(4.0 * om * q * om.transpose(), frame)
    }

    /// Zero-mean Gaussian characteristic function exp(−wᵀQw).
    pub fn characteristic(&self, w: &Vector4<f64>) -> f64 {
        (-(w.transpose() * self.quadratic_form() * w)[(0, 0)]).exp()
    }
}

pub(crate) fn symmetrize(m: &Matrix4<f64>) -> Matrix4<f64> {
    0.5 * (m + m.transpose())
}

/// Generator of the characteristic curves dw/dt = M w.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix4<f64>);

impl DriftMatrix {
    pub fn lambda(&self) -> f64 {
        self.0[(0, 0)] / 2.0
    }
    pub fn omega_c_sq(&self) -> f64 {
        -self.0[(1, 0)] * HBAR / (2.0 * MASS)
    }
    pub fn omega_d_sq(&self) -> f64 {
        -self.0[(3, 2)] * 2.0 * HBAR / MASS
    }
}

pub fn build_drift(coeffs: &MarkovCoefficients) -> DriftMatrix {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = 2.0 * coeffs.lambda;
    m[(0, 1)] = HBAR / (2.0 * MASS);
    m[(1, 0)] = -2.0 * MASS * coeffs.omega_c_sq / HBAR;
    m[(2, 3)] = 2.0 * HBAR / MASS;
    m[(3, 2)] = -MASS * coeffs.omega_d_sq / (2.0 * HBAR);
    DriftMatrix(m)
}

/// Eigenvalues Λ₁..Λ₄ and spectral projectors P₁..P₄ of the drift matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpectrum {
    pub lambdas: [Complex64; 4],
    pub projectors: [CMatrix4; 4],
}

impl DriftSpectrum {
    /// Σ Λⱼ Pⱼ.
    pub fn reconstruct(&self) -> CMatrix4 {
        self.lambdas
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix4::zeros(), |acc, (l, p)| acc + p * *l)
    }
}

/// Closed-form eigenvalues Λ₁,₂ = λ ± √(λ² − ω_c²), Λ₃,₄ = ±iω_d and their
/// projectors.
pub fn spectral_decompose(drift: &DriftMatrix) -> Result<DriftSpectrum> {
    let lambda = drift.lambda();
    let wc2 = drift.omega_c_sq();
    let wd2 = drift.omega_d_sq();
    if !(wc2 > 0.0) {
        return Err(Error::ConfluentSpectrum(format!("omega_c^2 = {wc2} must be > 0")));
    }
    if (lambda * lambda - wc2).abs() <= CONFLUENCE_TOL * wc2 {
        return Err(Error::ConfluentSpectrum(format!(
            "critical damping lambda = omega_c = {}",
            wc2.sqrt()
        )));
    }
    if !(wd2 > 0.0) || wd2.sqrt() <= CONFLUENCE_TOL {
        return Err(Error::ConfluentSpectrum(format!("omega_d^2 = {wd2} must be > 0")));
    }

    let root = Complex64::new(lambda * lambda - wc2, 0.0).sqrt();
    let wd = wd2.sqrt();
    let lambdas = [
        lambda + root,
        lambda - root,
        Complex64::new(0.0, wd),
        Complex64::new(0.0, -wd),
    ];

    let mut projectors = [CMatrix4::zeros(); 4];
    for j in 0..2 {
        let l = lambdas[j];
        let pref = (1.0 - l * l / wc2).inv();
        let p = &mut projectors[j];
        p[(0, 0)] = pref * (-l * l / wc2);
        p[(0, 1)] = pref * (-l * HBAR / (2.0 * MASS * wc2));
        p[(1, 0)] = pref * (2.0 * MASS * l / HBAR);
        p[(1, 1)] = pref;
    }
    for j in 2..4 {
        let l = lambdas[j];
        let p = &mut projectors[j];
        p[(2, 2)] = Complex64::new(0.5, 0.0);
        p[(2, 3)] = (MASS * l).inv() * HBAR;
        p[(3, 2)] = l * (MASS / (4.0 * HBAR));
        p[(3, 3)] = Complex64::new(0.5, 0.0);
    }
    Ok(DriftSpectrum { lambdas, projectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// exp(±Mt) = Σⱼ exp(±Λⱼt) Pⱼ.
pub fn exp_drift(spectrum: &DriftSpectrum, t: f64, sign: Sign) -> Result<Matrix4<f64>> {
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let sum = (0..4).fold(CMatrix4::zeros(), |acc, j| {
        acc + spectrum.projectors[j] * (spectrum.lambdas[j] * (s * t)).exp()
    });
    real_matrix(&sum, "exp(Mt)")
}

/// The constant diffusion matrix R with E = wᵀRw = D_pp Δ²/ħ − 2D_px ΔK.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionKernel {
    pub r: Matrix4<f64>,
}

impl DiffusionKernel {
    pub fn new(coeffs: &MarkovCoefficients) -> Self {
        let mut r = Matrix4::zeros();
        r[(0, 0)] = coeffs.d_pp / HBAR;
        r[(0, 1)] = -coeffs.d_px;
        r[(1, 0)] = -coeffs.d_px;
        DiffusionKernel { r }
    }

    pub fn r_sym(&self) -> Matrix4<f64> {
        symmetrize(&self.r)
    }

    pub fn is_zero(&self) -> bool {
        self.r.iter().all(|v| *v == 0.0)
    }
}

// (1 − e^{−xt})/x with its x → 0 limit.
fn relaxation_weight(x: Complex64, t: f64) -> Complex64 {
    let xt = x * t;
    if xt.norm() < 1e-5 {
        t * (1.0 - xt / 2.0 + xt * xt / 6.0)
    } else {
        (1.0 - (-xt).exp()) / x
    }
}

/// R₂(t), symmetrized and real.
pub fn r2_matrix(spectrum: &DriftSpectrum, kernel: &DiffusionKernel, t: f64) -> Result<Matrix4<f64>> {
    if kernel.is_zero() {
        return Ok(Matrix4::zeros());
    }
    let r = kernel.r_sym().map(|v| Complex64::new(v, 0.0));
    let mut sum = CMatrix4::zeros();
    for k in 0..2 {
        for l in 0..2 {
            let weight = relaxation_weight(spectrum.lambdas[k] + spectrum.lambdas[l], t);
            sum += spectrum.projectors[k].transpose() * r * spectrum.projectors[l] * weight;
        }
    }
    Ok(symmetrize(&real_matrix(&sum, "R2(t)")?))
}

/// dR₂/dt = Σ P_kᵀ R P_ℓ e^{−(Λ_k+Λ_ℓ)t}.
pub fn r2_rate(spectrum: &DriftSpectrum, kernel: &DiffusionKernel, t: f64) -> Result<Matrix4<f64>> {
    if kernel.is_zero() {
        return Ok(Matrix4::zeros());
    }
    let r = kernel.r_sym().map(|v| Complex64::new(v, 0.0));
    let mut sum = CMatrix4::zeros();
    for k in 0..2 {
        for l in 0..2 {
            let decay = (-(spectrum.lambdas[k] + spectrum.lambdas[l]) * t).exp();
            sum += spectrum.projectors[k].transpose() * r * spectrum.projectors[l] * decay;
        }
    }
    Ok(symmetrize(&real_matrix(&sum, "dR2/dt")?))
}

/// lim_{t→∞} R₂(t); needs λ > 0 unless the diffusion vanishes.
pub fn r2_infinity(spectrum: &DriftSpectrum, kernel: &DiffusionKernel) -> Result<Matrix4<f64>> {
    if kernel.is_zero() {
        return Ok(Matrix4::zeros());
    }
    let r = kernel.r_sym().map(|v| Complex64::new(v, 0.0));
    let mut sum = CMatrix4::zeros();
    for k in 0..2 {
        for l in 0..2 {
            let rate = spectrum.lambdas[k] + spectrum.lambdas[l];
            if !(rate.re > 0.0) {
                return Err(Error::Divergence(format!(
                    "Re(Lambda_{} + Lambda_{}) = {} <= 0 with non-zero diffusion",
                    k + 1,
                    l + 1,
                    rate.re
                )));
            }
            sum += spectrum.projectors[k].transpose() * r * spectrum.projectors[l] / rate;
        }
    }
    Ok(symmetrize(&real_matrix(&sum, "R2(inf)")?))
}

/// Everything needed to evolve states for one set of coefficients. Immutable
/// and shareable across threads.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub coeffs: MarkovCoefficients,
    pub drift: DriftMatrix,
    pub spectrum: DriftSpectrum,
    pub kernel: DiffusionKernel,
}

impl Propagator {
    pub fn new(coeffs: &MarkovCoefficients) -> Result<Self> {
        let drift = build_drift(coeffs);
        let spectrum = spectral_decompose(&drift)?;
        Ok(Propagator {
            coeffs: *coeffs,
            drift,
            spectrum,
            kernel: DiffusionKernel::new(coeffs),
        })
    }

    pub fn exp_drift(&self, t: f64, sign: Sign) -> Result<Matrix4<f64>> {
        exp_drift(&self.spectrum, t, sign)
    }

    pub fn r2(&self, t: f64) -> Result<Matrix4<f64>> {
        r2_matrix(&self.spectrum, &self.kernel, t)
    }

    pub fn r2_infinity(&self) -> Result<Matrix4<f64>> {
        r2_infinity(&self.spectrum, &self.kernel)
    }

    /// Q(t) = (e^{−Mt})ᵀ Q₀ e^{−Mt} + R₂(t).
    pub fn evolve_quadratic_form(&self, q0: &Matrix4<f64>, t: f64) -> Result<Matrix4<f64>> {
        check_time(t)?;
        let e = self.exp_drift(t, Sign::Minus)?;
        Ok(symmetrize(&(e.transpose() * q0 * e + self.r2(t)?)))
    }

    /// Time derivative of [`Propagator::evolve_quadratic_form`], differentiated
    /// term by term from the closed form.
    pub fn quadratic_form_rate(&self, q0: &Matrix4<f64>, t: f64) -> Result<Matrix4<f64>> {
        check_time(t)?;
        let e = self.exp_drift(t, Sign::Minus)?;
        let m = self.drift.0;
        let transported = e.transpose() * q0 * e;
        let rate = -(m.transpose() * transported) - transported * m
            + r2_rate(&self.spectrum, &self.kernel, t)?;
        Ok(symmetrize(&rate))
    }

    pub fn evolve_covariance(&self, sigma0: &Covariance4, t: f64) -> Result<Covariance4> {
        sigma0.expect_frame(Frame::Cmr)?;
        let q = self.evolve_quadratic_form(&sigma0.quadratic_form(), t)?;
        Ok(Covariance4::from_quadratic_form(&q, Frame::Cmr))
    }

    /// Long-time form: the CM block frozen at R₂(∞), the relative block
    /// rotated at ω_d, cross terms dropped.
    pub fn asymptotic_covariance(&self, sigma0: &Covariance4, t: f64) -> Result<Covariance4> {
        sigma0.expect_frame(Frame::Cmr)?;
        check_time(t)?;
        let rotation = (2..4).fold(CMatrix4::zeros(), |acc, j| {
            acc + self.spectrum.projectors[j] * (-self.spectrum.lambdas[j] * t).exp()
        });
        let e = real_matrix(&rotation, "asymptotic exp(-Mt)")?;
        let q = e.transpose() * sigma0.quadratic_form() * e + self.r2_infinity()?;
        Ok(Covariance4::from_quadratic_form(&symmetrize(&q), Frame::Cmr))
    }

    /// ρ_c(w, t) = ρ_c0(e^{−Mt} w) · exp(−wᵀR₂(t)w) for an arbitrary initial
    /// characteristic function.
    pub fn evaluate_characteristic<F>(&self, w: &Vector4<f64>, t: f64, initial_cf: F) -> Result<Complex64>
    where
        F: Fn(&Vector4<f64>) -> Complex64,
    {
        check_time(t)?;
        let pulled_back = self.exp_drift(t, Sign::Minus)? * w;
        let damping = (-(w.transpose() * self.r2(t)? * w)[(0, 0)]).exp();
        Ok(initial_cf(&pulled_back) * damping)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

fn real_matrix(m: &CMatrix4, what: &'static str) -> Result<Matrix4<f64>> {
    let scale = m.iter().map(|z| z.re.abs()).fold(1.0, f64::max);
    let residue = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if residue > REALNESS_TOL * scale || !residue.is_finite() {
        return Err(Error::NonReal { what, residue });
    }
    Ok(m.map(|z| z.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{coefficients, PhysicalParams, RegimeTag};

    fn closed_system() -> MarkovCoefficients {
        MarkovCoefficients::from_abcd(RegimeTag::ExactFiniteT, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    fn fig2() -> Propagator {
        let p = PhysicalParams::reference_bath(10.0, 0.2);
        Propagator::new(&coefficients(&p, RegimeTag::ExactFiniteT).unwrap()).unwrap()
    }

    fn cmax(m: &CMatrix4) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn closed_system_drift_entries() {
        let m = build_drift(&closed_system()).0;
        assert_eq!(m[(0, 1)], 0.5);
        assert_eq!(m[(1, 0)], -2.0);
        assert_eq!(m[(2, 3)], 2.0);
        assert_eq!(m[(3, 2)], -0.5);
        assert_eq!(m.trace(), 0.0);
        let c = coefficients(&PhysicalParams::reference_bath(1.0, 3.0), RegimeTag::ExactFiniteT).unwrap();
        let m = build_drift(&c).0;
        assert_eq!(m.trace(), 2.0 * c.lambda);
        assert_eq!(m.fixed_view::<2, 2>(0, 2).amax(), 0.0);
        assert_eq!(m.fixed_view::<2, 2>(2, 0).amax(), 0.0);
    }

    #[test]
    fn projector_identities() {
        let prop = fig2();
        let s = &prop.spectrum;
        let id = CMatrix4::identity();
        let total = s.projectors.iter().fold(CMatrix4::zeros(), |a, p| a + p);
        assert!(cmax(&(total - id)) < 1e-10);
        for j in 0..4 {
            for k in 0..4 {
                let prod = s.projectors[j] * s.projectors[k];
                let want = if j == k { s.projectors[j] } else { CMatrix4::zeros() };
                assert!(cmax(&(prod - want)) < 1e-10, "P{j}P{k}");
            }
        }
        let m = prop.drift.0.map(|v| Complex64::new(v, 0.0));
        assert!(cmax(&(s.reconstruct() - m)) < 1e-12);
    }

    #[test]
    fn underdamped_pair_is_conjugate() {
        let s = fig2().spectrum;
        assert_eq!(s.lambdas[0], s.lambdas[1].conj());
        assert!(cmax(&(s.projectors[0] - s.projectors[1].map(|z| z.conj()))) < 1e-14);
    }

    #[test]
    fn decoupled_block_completeness() {
        let s = spectral_decompose(&build_drift(&closed_system())).unwrap();
        assert_eq!(s.lambdas[2], Complex64::new(0.0, 1.0));
        let lower = s.projectors[2] + s.projectors[3];
        assert!((lower[(2, 2)] - 1.0).norm() < 1e-15 && (lower[(3, 3)] - 1.0).norm() < 1e-15);
        assert!(lower[(2, 3)].norm() < 1e-15 && lower[(3, 2)].norm() < 1e-15);
    }

    #[test]
    fn confluent_spectra_rejected() {
        let mut c = closed_system();
        c.omega_d_sq = 0.0;
        assert!(matches!(spectral_decompose(&build_drift(&c)), Err(Error::ConfluentSpectrum(_))));
        let mut c = closed_system();
        c.lambda = 1.0;
        assert!(matches!(spectral_decompose(&build_drift(&c)), Err(Error::ConfluentSpectrum(_))));
    }

    #[test]
    fn exp_drift_identity_and_inverse() {
        let prop = fig2();
        let e0 = prop.exp_drift(0.0, Sign::Minus).unwrap();
        assert!((e0 - Matrix4::identity()).amax() < 1e-14);
        for t in [0.3, 7.0, 100.0] {
            let prod = prop.exp_drift(t, Sign::Plus).unwrap() * prop.exp_drift(t, Sign::Minus).unwrap();
            assert!((prod - Matrix4::identity()).amax() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn exp_drift_matches_pade() {
        let prop = fig2();
        for t in [0.5, 4.0, 20.0] {
            let pade = (prop.drift.0 * t).exp();
            let spectral = prop.exp_drift(t, Sign::Plus).unwrap();
            assert!((pade - spectral).amax() < 1e-10 * pade.amax().max(1.0));
        }
    }

    #[test]
    fn long_time_rotation_block() {
        let prop = fig2();
        let t = 4000.0;
        let e = prop.exp_drift(t, Sign::Minus).unwrap();
        let wd = prop.coeffs.omega_d();
        assert!(e.fixed_view::<2, 2>(0, 0).amax() < 1e-10);
        let (c, s) = ((wd * t).cos(), (wd * t).sin());
        assert!((e[(2, 2)] - c).abs() < 1e-10);
        assert!((e[(2, 3)] + 2.0 * HBAR / (MASS * wd) * s).abs() < 1e-10);
        assert!((e[(3, 2)] - MASS * wd / (2.0 * HBAR) * s).abs() < 1e-10);
        assert!((e[(3, 3)] - c).abs() < 1e-10);
    }

    #[test]
    fn r2_starts_at_zero_and_reaches_limit() {
        let prop = fig2();
        assert_eq!(prop.r2(0.0).unwrap().amax(), 0.0);
        let c = prop.coeffs;
        let inf = prop.r2_infinity().unwrap();
        // stationary point of dQ/dt = −MᵀQ − QM + R
        let m = prop.drift.0;
        let lyap = m.transpose() * inf + inf * m - prop.kernel.r_sym();
        assert!(lyap.amax() < 1e-10 * inf.amax());
        assert!(inf.fixed_view::<2, 2>(2, 2).amax() == 0.0);
        let late = prop.r2(50.0 / c.lambda).unwrap();
        assert!((late - inf).amax() < 1e-9 * inf.amax());
    }

    #[test]
    fn r2_infinity_diverges_without_damping() {
        let mut c = closed_system();
        c.d_pp = 1.0;
        let prop = Propagator::new(&c).unwrap();
        assert!(matches!(prop.r2_infinity(), Err(Error::Divergence(_))));
        assert!(prop.r2(3.0).is_ok());
    }

    #[test]
    fn quadratic_form_round_trip() {
        let s = Matrix4::new(
            2.0, 0.1, 0.3, -0.2, //
            0.1, 1.5, 0.0, 0.4, //
            0.3, 0.0, 3.0, 0.2, //
            -0.2, 0.4, 0.2, 1.1,
        );
        let cov = Covariance4::new(s, Frame::Cmr).unwrap();
        let back = Covariance4::from_quadratic_form(&cov.quadratic_form(), Frame::Cmr);
        assert!((back.sigma() - s).amax() < 1e-14);
    }

    #[test]
    fn covariance_validation() {
        let mut s = Matrix4::identity();
        s[(0, 1)] = 0.5;
        assert!(Covariance4::new(s, Frame::Cmr).is_err());
        assert!(Covariance4::new(-Matrix4::identity(), Frame::Cmr).is_err());
        let lab = Covariance4::new(Matrix4::identity(), Frame::Lab).unwrap();
        assert!(matches!(fig2().evolve_covariance(&lab, 1.0), Err(Error::FrameMismatch { .. })));
    }

    #[test]
    fn evolve_at_zero_is_identity_map() {
        let prop = fig2();
        let s0 = Covariance4::new(Matrix4::identity() * 1.3, Frame::Cmr).unwrap();
        let s = prop.evolve_covariance(&s0, 0.0).unwrap();
        assert!((s.sigma() - s0.sigma()).amax() < 1e-14);
        assert!(prop.evolve_covariance(&s0, -1.0).is_err());
    }

    #[test]
    fn trace_preservation() {
        let prop = fig2();
        let w = Vector4::zeros();
        for t in [0.0, 1.0, 33.0] {
            let v = prop
                .evaluate_characteristic(&w, t, |_| Complex64::new(1.0, 0.0))
                .unwrap();
            assert_eq!(v, Complex64::new(1.0, 0.0));
        }
    }
}
