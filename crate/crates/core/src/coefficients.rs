//! Markovian master-equation constants A, B, C, D for the Lorentz-Drude bath
//! in each of the six regimes, the derived dynamical parameters and the
//! stability checks on them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::special::{digamma, k_function, solve_cubic, CubicRoots, KBranch, ZERO_T_THRESHOLD};
use crate::{Error, Result, CM_MASS, HBAR, MASS, OMEGA};

/// Imaginary residue allowed on a coefficient assembled from complex roots.
const REALNESS_TOL: f64 = 1e-10;
/// Minimum root separation (units of Ω) for the closed-form C and D.
const DEGENERATE_ROOT_GUARD: f64 = 1e-8;

/// Dimensionless model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Drude cutoff Ω_c / Ω.
    pub omega_c: f64,
    /// Bath coupling γ / Ω.
    pub gamma: f64,
    /// k_BT / (ħΩ).
    pub temperature: f64,
    /// Inter-oscillator coupling κ / (mΩ²).
    pub kappa: f64,
}

impl PhysicalParams {
    /// Ω_c/Ω = 40, γ/Ω = 1/128; the bath used in every figure.
    pub fn reference_bath(temperature: f64, kappa: f64) -> Self {
        PhysicalParams {
            omega_c: 40.0,
            gamma: 1.0 / 128.0,
            temperature,
            kappa,
        }
    }

    pub fn gamma_crit(&self) -> f64 {
        OMEGA * OMEGA / (2.0 * self.omega_c)
    }

    pub fn kappa_crit() -> f64 {
        -MASS * OMEGA * OMEGA / 4.0
    }

    /// ν = 2πk_BT/ħ.
    pub fn matsubara(&self) -> f64 {
        2.0 * PI * self.temperature / HBAR
    }

    /// Domain checks only; stability is judged by [`check_stability`].
    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_c, self.gamma, self.temperature, self.kappa]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        if self.omega_c <= 0.0 {
            return Err(Error::InvalidInput(format!("omega_c must be > 0, got {}", self.omega_c)));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidInput(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if self.temperature < 0.0 {
            return Err(Error::InvalidInput(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// The six rows of the coefficient classification table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeTag {
    ExactFiniteT,
    ExactZeroT,
    ExactClassical,
    WeakFiniteT,
    WeakZeroT,
    WeakClassical,
}

impl RegimeTag {
    pub const ALL: [RegimeTag; 6] = [
        RegimeTag::ExactFiniteT,
        RegimeTag::ExactZeroT,
        RegimeTag::ExactClassical,
        RegimeTag::WeakFiniteT,
        RegimeTag::WeakZeroT,
        RegimeTag::WeakClassical,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::ExactFiniteT => "exact-finite-t",
            RegimeTag::ExactZeroT => "exact-zero-t",
            RegimeTag::ExactClassical => "exact-classical",
            RegimeTag::WeakFiniteT => "weak-finite-t",
            RegimeTag::WeakZeroT => "weak-zero-t",
            RegimeTag::WeakClassical => "weak-classical",
        }
    }

    pub fn is_weak(&self) -> bool {
        matches!(
            self,
            RegimeTag::WeakFiniteT | RegimeTag::WeakZeroT | RegimeTag::WeakClassical
        )
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, RegimeTag::ExactClassical | RegimeTag::WeakClassical)
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegimeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegimeTag::ALL
            .iter()
            .copied()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown regime '{s}'")))
    }
}

/// A, B, C, D together with λ, ω_c, ω_d, D_px, D_pp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovCoefficients {
    pub regime: RegimeTag,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub lambda: f64,
    /// ω_c² = Ω² + A/(2m)
    pub omega_c_sq: f64,
    /// ω_d² = Ω² + 4κ/m
    pub omega_d_sq: f64,
    pub d_px: f64,
    pub d_pp: f64,
}

impl MarkovCoefficients {
    pub fn from_abcd(regime: RegimeTag, a: f64, b: f64, c: f64, d: f64, kappa: f64) -> Self {
        MarkovCoefficients {
            regime,
            a,
            b,
            c,
            d,
            lambda: b / 2.0,
            omega_c_sq: OMEGA * OMEGA + a / (2.0 * MASS),
            omega_d_sq: OMEGA * OMEGA + 4.0 * kappa / MASS,
            d_px: c / (2.0 * HBAR),
            d_pp: d / HBAR,
        }
    }

    /// Effective CM frequency; NaN when ω_c² < 0.
    pub fn omega_c(&self) -> f64 {
        self.omega_c_sq.sqrt()
    }

    /// Relative-motion frequency; NaN when ω_d² < 0.
    pub fn omega_d(&self) -> f64 {
        self.omega_d_sq.sqrt()
    }
}

/// A = −M z₁(z₂+z₃), B = −(z₂+z₃).
pub fn exact_ab(roots: &CubicRoots) -> Result<(f64, f64)> {
    if roots.gamma == 0.0 {
        return Ok((0.0, 0.0));
    }
    ensure_stable_roots(roots)?;
    let [z1, z2, z3] = roots.z;
    let a = -CM_MASS * z1 * (z2 + z3);
    let b = -(z2 + z3);
    Ok((real_part(a, "A")?, real_part(b, "B")?))
}

/// Exact C, D with K evaluated on the branch picked by temperature.
pub fn exact_cd(roots: &CubicRoots, params: &PhysicalParams) -> Result<(f64, f64)> {
    exact_cd_with_branch(roots, params, KBranch::Auto)
}

/// Exact C, D with an explicit K branch. The k_BT-proportional leading terms
/// are always included, so `ZeroT` at temperature 0 is the zero-temperature
/// closed form.
pub fn exact_cd_with_branch(
    roots: &CubicRoots,
    params: &PhysicalParams,
    branch: KBranch,
) -> Result<(f64, f64)> {
    if roots.gamma == 0.0 {
        return Ok((0.0, 0.0));
    }
    ensure_stable_roots(roots)?;
    let separation = roots.min_separation();
    if separation < DEGENERATE_ROOT_GUARD * OMEGA {
        return Err(Error::DegenerateRoots {
            min_separation: separation,
        });
    }
    let [z1, z2, z3] = roots.z;
    let nu = params.matsubara();
    let kt = params.temperature;
    let mut k = [Complex64::new(0.0, 0.0); 3];
    for (slot, z) in k.iter_mut().zip(roots.z) {
        *slot = k_function(z, nu, roots.omega_c, branch)?;
    }
    let (cw, dw) = cd_weights(roots);

    let c = kt * (z2 + z3) / z1 + cw[0] * k[0] + cw[1] * k[1] + cw[2] * k[2];
    let d = -kt * CM_MASS * (z2 + z3) + dw[0] * k[0] + dw[1] * k[1] + dw[2] * k[2];
    Ok((real_part(c, "C")?, real_part(d, "D")?))
}

/// Weights multiplying K(zᵢ, ν) in the Vieta-simplified C and D.
pub fn cd_weights(roots: &CubicRoots) -> ([Complex64; 3], [Complex64; 3]) {
    let [z1, z2, z3] = roots.z;
    let h = HBAR / PI;
    let s23 = z2 + z3;
    let c = [
        h * s23 * (z1 * z1 + z2 * z3) / ((z1 - z2) * (z1 - z3)),
        h * (z1 + z3) * s23 * z2 / ((z1 - z2) * (z3 - z2)),
        h * (z1 + z2) * s23 * z3 / ((z1 - z3) * (z2 - z3)),
    ];
    let hm = h * CM_MASS;
    let d = [
        hm * z1 * z1 * s23 * s23 / ((z1 - z2) * (z1 - z3)),
        hm * (z1 + z3) * s23 * z2 * z2 / ((z1 - z2) * (z3 - z2)),
        hm * (z1 + z2) * s23 * z3 * z3 / ((z1 - z3) * (z2 - z3)),
    ];
    (c, d)
}

/// High-temperature limit: C = k_BT(z₂+z₃)/z₁, D = −k_BT M(z₂+z₃).
pub fn classical_cd(roots: &CubicRoots, temperature: f64) -> Result<(f64, f64)> {
    if roots.gamma == 0.0 {
        return Ok((0.0, 0.0));
    }
    ensure_stable_roots(roots)?;
    let [z1, z2, z3] = roots.z;
    let c = temperature * (z2 + z3) / z1;
    let d = -temperature * CM_MASS * (z2 + z3);
    Ok((real_part(c, "C")?, real_part(d, "D")?))
}

/// Leading-order-in-γ A and B.
pub fn weak_ab(params: &PhysicalParams) -> (f64, f64) {
    let wc = params.omega_c;
    let denom = wc * wc + OMEGA * OMEGA;
    let a = -2.0 * CM_MASS * params.gamma * wc * wc * wc / denom;
    let b = 2.0 * params.gamma * wc * wc / denom;
    (a, b)
}

/// Leading-order-in-γ C and D at any temperature.
pub fn weak_cd_finite_t(params: &PhysicalParams) -> Result<(f64, f64)> {
    if params.temperature < ZERO_T_THRESHOLD {
        return Ok(weak_cd_zero_t(params));
    }
    let wc = params.omega_c;
    let g = params.gamma;
    let kt = params.temperature;
    let nu = params.matsubara();
    let denom = wc * wc + OMEGA * OMEGA;
    let x = Complex64::new(1.0, OMEGA / nu);
    let bracket = 2.0 * PI * kt / (HBAR * wc) + 2.0 * digamma(x)?.re
        - 2.0 * digamma(Complex64::new(1.0 + wc / nu, 0.0))?.re;
    let c = HBAR * g * wc * wc / (PI * denom) * bracket;
    let coth = 1.0 / (HBAR * OMEGA / (2.0 * kt)).tanh();
    let d = HBAR * CM_MASS * g * wc * wc * OMEGA * coth / denom;
    Ok((c, d))
}

pub fn weak_cd_zero_t(params: &PhysicalParams) -> (f64, f64) {
    let wc = params.omega_c;
    let g = params.gamma;
    let denom = wc * wc + OMEGA * OMEGA;
    let c = -2.0 * HBAR * g * wc * wc / PI * (wc / OMEGA).ln() / denom;
    let d = HBAR * CM_MASS * g * wc * wc * OMEGA / denom;
    (c, d)
}

pub fn weak_cd_classical(params: &PhysicalParams) -> (f64, f64) {
    let wc = params.omega_c;
    let g = params.gamma;
    let kt = params.temperature;
    let denom = wc * wc + OMEGA * OMEGA;
    let c = 2.0 * g * wc / denom * kt;
    let d = 2.0 * g * CM_MASS * kt * wc * wc / denom;
    (c, d)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CoefficientOptions {
    /// Turn a classical-regime temperature mismatch into an error.
    pub strict_regime: bool,
}

/// Warning text when a classical regime is requested with k_BT < ħΩ_c.
pub fn regime_mismatch(params: &PhysicalParams, regime: RegimeTag) -> Option<String> {
    if regime.is_classical() && params.temperature < HBAR * params.omega_c {
        Some(format!(
            "{regime} assumes k_BT >> hbar*Omega_c, but k_BT = {} < {}",
            params.temperature, params.omega_c
        ))
    } else {
        None
    }
}

pub fn coefficients(params: &PhysicalParams, regime: RegimeTag) -> Result<MarkovCoefficients> {
    coefficients_with(params, regime, CoefficientOptions::default())
}

pub fn coefficients_with(
    params: &PhysicalParams,
    regime: RegimeTag,
    options: CoefficientOptions,
) -> Result<MarkovCoefficients> {
    params.validate()?;
    if options.strict_regime {
        if let Some(msg) = regime_mismatch(params, regime) {
            return Err(Error::RegimeMismatch(msg));
        }
    }
    if params.gamma == 0.0 {
        return Ok(MarkovCoefficients::from_abcd(regime, 0.0, 0.0, 0.0, 0.0, params.kappa));
    }

    let (a, b, c, d) = if regime.is_weak() {
        let (a, b) = weak_ab(params);
        let (c, d) = match regime {
            RegimeTag::WeakFiniteT => weak_cd_finite_t(params)?,
            RegimeTag::WeakZeroT => weak_cd_zero_t(params),
            _ => weak_cd_classical(params),
        };
        (a, b, c, d)
    } else {
        let roots = solve_cubic(OMEGA, params.omega_c, params.gamma)?;
        let (a, b) = exact_ab(&roots)?;
        let (c, d) = match regime {
            RegimeTag::ExactFiniteT => exact_cd(&roots, params)?,
            RegimeTag::ExactZeroT => {
                let cold = PhysicalParams {
                    temperature: 0.0,
                    ..*params
                };
                exact_cd_with_branch(&roots, &cold, KBranch::ZeroT)?
            }
            _ => classical_cd(&roots, params.temperature)?,
        };
        (a, b, c, d)
    };
    Ok(MarkovCoefficients::from_abcd(regime, a, b, c, d, params.kappa))
}

/// Signed distance to one stability bound; non-negative means satisfied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub roots_stable: bool,
    pub drift_stable: bool,
    pub diffusion_stable: bool,
    pub margins: Vec<Margin>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.roots_stable && self.drift_stable && self.diffusion_stable
    }

    pub fn violations(&self) -> Vec<&'static str> {
        self.margins
            .iter()
            .filter(|m| !(m.value >= 0.0))
            .map(|m| m.name)
            .collect()
    }
}

/// Evaluates every stability bound. An uncoupled bath (γ = 0) counts as
/// root-stable; its imaginary roots never enter the coefficients.
pub fn check_stability(coeffs: &MarkovCoefficients, roots: &CubicRoots) -> StabilityReport {
    let root_tol = 1e-12 * roots.omega_c.max(1.0);
    let root_margin = -roots.max_real_part() - root_tol;
    let diffusion_cross = coeffs.d_pp + 8.0 * coeffs.d_px * coeffs.lambda * MASS;

    let margins = vec![
        Margin { name: "roots_real_part", value: root_margin },
        Margin { name: "lambda", value: coeffs.lambda },
        Margin { name: "omega_c_sq", value: coeffs.omega_c_sq },
        Margin { name: "omega_d_sq", value: coeffs.omega_d_sq },
        Margin { name: "d_pp", value: coeffs.d_pp },
        Margin { name: "d_pp_plus_8_d_px_lambda_m", value: diffusion_cross },
    ];

    StabilityReport {
        roots_stable: roots.gamma == 0.0 || root_margin > 0.0,
        drift_stable: coeffs.lambda >= 0.0 && coeffs.omega_c_sq >= 0.0 && coeffs.omega_d_sq >= 0.0,
        diffusion_stable: coeffs.d_pp >= 0.0 && diffusion_cross >= 0.0,
        margins,
    }
}

fn ensure_stable_roots(roots: &CubicRoots) -> Result<()> {
    let tol = 1e-12 * roots.omega_c.max(1.0);
    if roots.max_real_part() >= -tol {
        return Err(Error::Stability(format!(
            "cubic root with Re z >= 0 (max Re z = {:e}); gamma must stay below gamma_crit = {}",
            roots.max_real_part(),
            OMEGA * OMEGA / (2.0 * roots.omega_c)
        )));
    }
    Ok(())
}

fn real_part(z: Complex64, what: &'static str) -> Result<f64> {
    let scale = z.re.abs().max(1.0);
    if z.im.abs() > REALNESS_TOL * scale || !z.re.is_finite() {
        return Err(Error::NonReal {
            what,
            residue: z.im.abs(),
        });
    }
    Ok(z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_roots() -> CubicRoots {
        solve_cubic(1.0, 40.0, 1.0 / 128.0).unwrap()
    }

    #[test]
    fn exact_ab_table_values() {
        let (a, b) = exact_ab(&table_roots()).unwrap();
        assert!((a + 1.2498).abs() < 5e-4, "A = {a}");
        assert!((b - 0.015628).abs() < 5e-6, "B = {b}");
    }

    #[test]
    fn exact_ab_matches_unsimplified_form() {
        let r = table_roots();
        let [_, z2, z3] = r.z;
        let (wc, g, m) = (40.0, 1.0 / 128.0, CM_MASS);
        let den = (wc + z2) * (wc + z3);
        let a_long = -2.0 * m * g * wc * wc * (wc + z2 + z3) / den;
        let b_long = 2.0 * g * wc * wc / den;
        let (a, b) = exact_ab(&r).unwrap();
        assert!((a_long.re - a).abs() < 1e-12 && a_long.im.abs() < 1e-12);
        assert!((b_long.re - b).abs() < 1e-12 && b_long.im.abs() < 1e-12);
    }

    #[test]
    fn closed_system_is_all_zero() {
        for regime in RegimeTag::ALL {
            let p = PhysicalParams { omega_c: 40.0, gamma: 0.0, temperature: 3.0, kappa: 0.0 };
            let c = coefficients(&p, regime).unwrap();
            assert_eq!((c.a, c.b, c.c, c.d), (0.0, 0.0, 0.0, 0.0));
            assert_eq!(c.omega_c(), 1.0);
            assert_eq!(c.lambda, 0.0);
        }
    }

    #[test]
    fn weak_ab_values() {
        let p = PhysicalParams::reference_bath(1.0, 0.0);
        let c = coefficients(&p, RegimeTag::WeakFiniteT).unwrap();
        assert!((c.a + 2000.0 / 1601.0).abs() < 1e-12);
        assert!((c.b - 25.0 / 1601.0).abs() < 1e-12);
    }

    #[test]
    fn weak_classical_values() {
        let p = PhysicalParams::reference_bath(100.0, 0.0);
        let c = coefficients(&p, RegimeTag::WeakClassical).unwrap();
        let g = 1.0 / 128.0;
        assert!((c.d - 2.0 * g * 2.0 * 100.0 * 1600.0 / 1601.0).abs() < 1e-12);
        assert!((c.c - 2.0 * g * 40.0 * 100.0 / 1601.0).abs() < 1e-12);
    }

    #[test]
    fn weak_finite_t_reduces_to_zero_t() {
        let hot = PhysicalParams::reference_bath(1e-6, 0.0);
        let (c, d) = weak_cd_finite_t(&hot).unwrap();
        let (c0, d0) = weak_cd_zero_t(&hot);
        assert!((c - c0).abs() / c0.abs() < 1e-4);
        assert!((d - d0).abs() / d0.abs() < 1e-12);
    }

    #[test]
    fn derived_quantities() {
        let p = PhysicalParams::reference_bath(0.1, -0.2);
        let c = coefficients(&p, RegimeTag::ExactFiniteT).unwrap();
        assert_eq!(c.lambda, c.b / 2.0);
        assert_eq!(c.omega_c_sq, 1.0 + c.a / 2.0);
        assert!((c.omega_d_sq - 0.2).abs() < 1e-15);
        assert_eq!(c.d_px, c.c / 2.0);
        assert_eq!(c.d_pp, c.d);
        // mpmath reference for the full exact formula
        assert!((c.c + 0.0202000060972).abs() < 1e-11, "C = {}", c.c);
        assert!((c.d - 0.0101883744285).abs() < 1e-11, "D = {}", c.d);
    }

    #[test]
    fn stability_verdicts() {
        let roots = table_roots();
        let p = PhysicalParams::reference_bath(1.0, 0.2);
        let c = coefficients(&p, RegimeTag::ExactFiniteT).unwrap();
        assert!(check_stability(&c, &roots).is_stable());

        let p = PhysicalParams::reference_bath(1.0, -0.3);
        let c = coefficients(&p, RegimeTag::ExactFiniteT).unwrap();
        let report = check_stability(&c, &roots);
        assert!(!report.drift_stable);
        assert!((c.omega_d_sq + 0.2).abs() < 1e-15);
        assert_eq!(report.violations(), vec!["omega_d_sq"]);

        let crit = solve_cubic(1.0, 40.0, 1.0 / 80.0).unwrap();
        let c = MarkovCoefficients::from_abcd(RegimeTag::ExactFiniteT, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(!check_stability(&c, &crit).roots_stable);
    }

    #[test]
    fn critical_coupling_is_rejected() {
        let p = PhysicalParams { omega_c: 40.0, gamma: 1.0 / 80.0, temperature: 1.0, kappa: 0.0 };
        assert!(matches!(coefficients(&p, RegimeTag::ExactFiniteT), Err(Error::Stability(_))));
    }

    #[test]
    fn regime_mismatch_is_a_warning_unless_strict() {
        let p = PhysicalParams::reference_bath(1.0, 0.0);
        assert!(regime_mismatch(&p, RegimeTag::ExactClassical).is_some());
        assert!(coefficients(&p, RegimeTag::ExactClassical).is_ok());
        let strict = CoefficientOptions { strict_regime: true };
        assert!(matches!(
            coefficients_with(&p, RegimeTag::ExactClassical, strict),
            Err(Error::RegimeMismatch(_))
        ));
        assert!(regime_mismatch(&PhysicalParams::reference_bath(1e3, 0.0), RegimeTag::WeakClassical).is_none());
    }

    #[test]
    fn regime_tags_round_trip() {
        for r in RegimeTag::ALL {
            assert_eq!(r.as_str().parse::<RegimeTag>().unwrap(), r);
        }
        assert!("hot".parse::<RegimeTag>().is_err());
    }

    #[test]
    fn invalid_params() {
        let p = PhysicalParams { omega_c: 40.0, gamma: 0.001, temperature: -1.0, kappa: 0.0 };
        assert!(matches!(coefficients(&p, RegimeTag::ExactFiniteT), Err(Error::InvalidInput(_))));
    }
}
