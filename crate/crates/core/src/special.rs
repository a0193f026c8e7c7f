//! Cubic roots of the bath characteristic polynomial, the complex digamma
//! function and the temperature kernel K(z, ν) built from it.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Below this k_BT/(ħΩ) the finite-temperature kernel is replaced by its
/// closed zero-temperature limit.
pub const ZERO_T_THRESHOLD: f64 = 1e-8;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Roots of z³ + Ω_c z² + Ω² z + Ω²Ω_c − 2γΩ_c² = 0, ordered by ascending real
/// part. A conjugate pair is stored with the positive imaginary part first and
/// the second member is the exact conjugate of the first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicRoots {
    pub z: [Complex64; 3],
    pub omega: f64,
    pub omega_c: f64,
    pub gamma: f64,
}

impl CubicRoots {
    pub fn z1(&self) -> Complex64 {
        self.z[0]
    }
    pub fn z2(&self) -> Complex64 {
        self.z[1]
    }
    pub fn z3(&self) -> Complex64 {
        self.z[2]
    }

    /// Coefficients (a, b, c) of the monic cubic z³ + a z² + b z + c.
    pub fn monic_coefficients(&self) -> [f64; 3] {
        cubic_coefficients(self.omega, self.omega_c, self.gamma)
    }

    pub fn poly(&self, z: Complex64) -> Complex64 {
        let [a, b, c] = self.monic_coefficients();
        ((z + a) * z + b) * z + c
    }

    /// Absolute residuals of the three Vieta relations.
    pub fn vieta_residuals(&self) -> [f64; 3] {
        let [a, b, c] = self.monic_coefficients();
        let [z1, z2, z3] = self.z;
        [
            (z1 + z2 + z3 + a).norm(),
            (z1 * z2 + z2 * z3 + z3 * z1 - b).norm(),
            (z1 * z2 * z3 + c).norm(),
        ]
    }

    /// Smallest pairwise distance |zᵢ − zⱼ|.
    pub fn min_separation(&self) -> f64 {
        let [z1, z2, z3] = self.z;
        (z1 - z2).norm().min((z1 - z3).norm()).min((z2 - z3).norm())
    }

    pub fn max_real_part(&self) -> f64 {
        self.z.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn cubic_coefficients(omega: f64, omega_c: f64, gamma: f64) -> [f64; 3] {
    let w2 = omega * omega;
    [
        omega_c,
        w2,
        w2 * omega_c - 2.0 * gamma * omega_c * omega_c,
    ]
}

/// Solves the bath cubic via companion-matrix eigenvalues followed by Newton
/// polishing.
pub fn solve_cubic(omega: f64, omega_c: f64, gamma: f64) -> Result<CubicRoots> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidInput(format!("omega must be > 0, got {omega}")));
    }
    if !(omega_c > 0.0 && omega_c.is_finite()) {
        return Err(Error::InvalidInput(format!("omega_c must be > 0, got {omega_c}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("gamma must be >= 0, got {gamma}")));
    }

    let [a, b, c] = cubic_coefficients(omega, omega_c, gamma);
    let poly = |z: Complex64| ((z + a) * z + b) * z + c;
    let dpoly = |z: Complex64| (3.0 * z + 2.0 * a) * z + b;
    let tol = 1e-10 * omega_c.powi(3).max(1.0);

    let companion = Matrix3::new(-a, -b, -c, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let mut guesses: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();

    let discriminant = 18.0 * a * b * c - 4.0 * a.powi(3) * c + a * a * b * b
        - 4.0 * b.powi(3)
        - 27.0 * c * c;

    let polish = |mut z: Complex64, real: bool| -> Complex64 {
        for _ in 0..8 {
            let p = poly(z);
            if p.norm() == 0.0 {
                break;
            }
            let dp = dpoly(z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            z -= step;
            if real {
                z.im = 0.0;
            }
            if step.norm() <= f64::EPSILON * z.norm().max(1.0) {
                break;
            }
        }
        z
    };

    let mut roots: [Complex64; 3];
    if c == 0.0 {
        // z(z² + a z + b): one root exactly at the origin.
        let disc = Complex64::new(a * a - 4.0 * b, 0.0).sqrt();
        let q = -0.5 * (a + a.signum() * disc);
        let r1 = q;
        let r2 = Complex64::new(b, 0.0) / q;
        roots = [Complex64::new(0.0, 0.0), r1, r2];
        if disc.im != 0.0 {
            let pair = if r1.im > 0.0 { r1 } else { r2 };
            roots[1] = pair;
            roots[2] = pair.conj();
        }
    } else if discriminant < 0.0 {
        // One real root, one conjugate pair.
        guesses.sort_by(|x, y| x.im.abs().total_cmp(&y.im.abs()));
        let real = polish(Complex64::new(guesses[0].re, 0.0), true);
        let seed = if guesses[1].im >= 0.0 { guesses[1] } else { guesses[2] };
        let mut pair = polish(Complex64::new(seed.re, seed.im.abs()), false);
        if pair.im < 0.0 {
            pair = pair.conj();
        }
        roots = [real, pair, pair.conj()];
    } else {
        roots = [
            polish(Complex64::new(guesses[0].re, 0.0), true),
            polish(Complex64::new(guesses[1].re, 0.0), true),
            polish(Complex64::new(guesses[2].re, 0.0), true),
        ];
    }

    roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(y.im.total_cmp(&x.im)));

    let residuals = [poly(roots[0]).norm(), poly(roots[1]).norm(), poly(roots[2]).norm()];
    if residuals.iter().any(|r| !(r.is_finite() && *r < tol)) {
        return Err(Error::NonConvergence { residuals });
    }

    Ok(CubicRoots {
        z: roots,
        omega,
        omega_c,
        gamma,
    })
}

// B_{2k}/(2k) for k = 1..=10.
const ASYMPTOTIC: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
];

/// Complex digamma Ψ(z) = Γ'(z)/Γ(z).
pub fn digamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("digamma of non-finite argument {z}")));
    }
    if z.re <= 0.0 && z.im.abs() < 1e-12 && (z.re - z.re.round()).abs() < 1e-12 {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    if z.im == 0.0 && z.re == 1.0 {
        return Ok(Complex64::new(-EULER_GAMMA, 0.0));
    }
    if z.re < 0.5 {
        // Ψ(z) = Ψ(1 − z) − π cot(πz)
        let reflected = digamma_right_half(Complex64::new(1.0, 0.0) - z);
        return Ok(reflected - PI * cot(PI * z));
    }
    Ok(digamma_right_half(z))
}

fn digamma_right_half(mut z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < 16.0 {
        shift += z.inv();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for coeff in ASYMPTOTIC {
        series += coeff * pow;
        pow *= inv2;
    }
    z.ln() - 0.5 * inv - series - shift
}

// cot evaluated through the exponential that stays bounded.
fn cot(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im >= 0.0 {
        let e = (2.0 * i * z).exp();
        i * (e + 1.0) / (e - 1.0)
    } else {
        let e = (-2.0 * i * z).exp();
        i * (1.0 + e) / (1.0 - e)
    }
}

/// Which closed form of K(z, ν) to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KBranch {
    /// Ψ(1 − z/ν) − Ψ(Ω_c/ν)
    FiniteT,
    /// ln(−z/Ω_c), the ν → 0 limit
    ZeroT,
    /// ν/Ω_c, the high-temperature limit
    Classical,
    /// `ZeroT` below [`ZERO_T_THRESHOLD`], otherwise `FiniteT`
    Auto,
}

/// K(zᵢ, ν) with ν = 2πk_BT/ħ.
pub fn k_function(z: Complex64, nu: f64, omega_c: f64, branch: KBranch) -> Result<Complex64> {
    if !(z.re < 0.0) {
        return Err(Error::Domain(format!("K(z, nu) needs Re z < 0, got {z}")));
    }
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("nu must be >= 0, got {nu}")));
    }
    let branch = match branch {
        KBranch::Auto if nu / (2.0 * PI) < ZERO_T_THRESHOLD => KBranch::ZeroT,
        KBranch::Auto => KBranch::FiniteT,
        other => other,
    };
    match branch {
        KBranch::ZeroT => Ok((-z / omega_c).ln()),
        KBranch::Classical => Ok(Complex64::new(nu / omega_c, 0.0)),
        KBranch::FiniteT => {
            if nu == 0.0 {
                return Err(Error::Domain("finite-temperature K needs nu > 0".into()));
            }
            let first = digamma(Complex64::new(1.0, 0.0) - z / nu)?;
            let second = digamma(Complex64::new(omega_c / nu, 0.0))?;
            Ok(first - second)
        }
        KBranch::Auto => unreachable!(),
    }
}
