use hpz_core::special::{digamma, k_function, solve_cubic, KBranch};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn vieta_sweep(omega_c in 1.0f64..200.0, frac in 0.0f64..0.999) {
        let gamma = frac / (2.0 * omega_c);
        let r = solve_cubic(1.0, omega_c, gamma).unwrap();
        let [s1, s2, s3] = r.vieta_residuals();
        let scale = omega_c.powi(3).max(1.0);
        prop_assert!(s1.abs() < 1e-10 * scale && s2.abs() < 1e-10 * scale && s3.abs() < 1e-10 * scale);
        prop_assert!(r.max_real_part() < 0.0 || gamma == 0.0);
    }

    #[test]
    fn digamma_recurrence(re in -20.0f64..30.0, im in 0.05f64..30.0) {
        let z = Complex64::new(re, im);
        let lhs = digamma(z + 1.0).unwrap();
        let rhs = digamma(z).unwrap() + 1.0 / z;
        prop_assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn digamma_conjugate(re in -10.0f64..10.0, im in 0.01f64..10.0) {
        let z = Complex64::new(re, im);
        prop_assert!((digamma(z.conj()).unwrap() - digamma(z).unwrap().conj()).norm() < 1e-13 * digamma(z).unwrap().norm().max(1.0));
    }

    #[test]
    fn digamma_reflection(re in 0.05f64..0.95, im in -3.0f64..3.0) {
        // ψ(1−z) − ψ(z) = π cot(πz)
        let z = Complex64::new(re, im);
        let lhs = digamma(1.0 - z).unwrap() - digamma(z).unwrap();
        let pz = std::f64::consts::PI * z;
        let rhs = std::f64::consts::PI * pz.cos() / pz.sin();
        prop_assert!((lhs - rhs).norm() < 1e-11 * rhs.norm().max(1.0));
    }
}

#[test]
fn classical_branch_limit() {
    let r = solve_cubic(1.0, 40.0, 1.0 / 128.0).unwrap();
    let nu = 2.0 * std::f64::consts::PI * 1e4;
    let finite = k_function(r.z1(), nu, 40.0, KBranch::FiniteT).unwrap();
    assert!(((finite.re - nu / 40.0) / (nu / 40.0)).abs() < 0.01);
}

#[test]
fn cubic_runtime() {
    let start = std::time::Instant::now();
    for _ in 0..100 {
        solve_cubic(1.0, 40.0, 1.0 / 128.0).unwrap();
    }
    assert!(start.elapsed().as_secs_f64() / 100.0 < 1e-3);
}
