use hpz_core::coefficients::{coefficients, MarkovCoefficients, PhysicalParams, RegimeTag};
use hpz_core::gaussian::{epr_initial, symplectic_eigenvalues};
use hpz_core::oracle::{integrate_moments, integrate_moments_checkpoints, moment_rhs, rk4_fixed, step_bound};
use hpz_core::propagator::Propagator;
use hpz_core::scenario::{Prepared, Scenario};

fn fig2() -> (Propagator, hpz_core::propagator::Covariance4) {
    let prep = Prepared::new(&Scenario::preset("fig2").unwrap()).unwrap();
    (prep.propagator, prep.sigma0)
}

#[test]
fn rk4_matches_closed_form_fig2() {
    let (p, s0) = fig2();
    let dt = step_bound(&p.coeffs);
    let times: Vec<f64> = (1..=10).map(|i| 5.0 * i as f64).collect();
    let rk = integrate_moments_checkpoints(&p, &s0, &times, dt).unwrap();
    for (t, s) in times.iter().zip(&rk) {
        let closed = p.evolve_covariance(&s0, *t).unwrap();
        let diff = (closed.sigma() - s.sigma()).amax();
        assert!(diff < 1e-8, "t = {t}: {diff:e}");
    }
}

#[test]
fn closed_form_derivative_matches_rhs() {
    let (p, s0) = fig2();
    let q0 = s0.quadratic_form();
    let r = p.kernel.r_sym();
    for t in [0.4, 3.3, 21.0] {
        let h = 1e-6;
        let fd = (p.evolve_quadratic_form(&q0, t + h).unwrap() - p.evolve_quadratic_form(&q0, t - h).unwrap()) / (2.0 * h);
        let rhs = moment_rhs(&p.evolve_quadratic_form(&q0, t).unwrap(), &p.drift, &r);
        assert!((fd - rhs).amax() < 1e-6 * rhs.amax().max(1.0), "t = {t}");
        let analytic = p.quadratic_form_rate(&q0, t).unwrap();
        assert!((analytic - rhs).amax() < 1e-10 * rhs.amax().max(1.0));
    }
}

#[test]
fn hamiltonian_flow_conserves_spectrum() {
    let c = MarkovCoefficients::from_abcd(RegimeTag::ExactFiniteT, 0.0, 0.0, 0.0, 0.0, 0.3);
    let p = Propagator::new(&c).unwrap();
    let s0 = epr_initial(1.4, 0.6).unwrap();
    let dt = step_bound(&c);
    for s in integrate_moments_checkpoints(&p, &s0, &[1.0, 5.0, 10.0], dt).unwrap() {
        let spec = symplectic_eigenvalues(&s).unwrap();
        assert!((spec.nu1 - 1.4).abs() < 1e-8 && (spec.nu2 - 1.4).abs() < 1e-8);
    }
}

#[test]
fn fourth_order_convergence() {
    // step sizes above the production bound, through the unguarded core
    let (p, s0) = fig2();
    let r = p.kernel.r_sym();
    let q0 = s0.quadratic_form();
    let t = 10.0;
    let exact = p.evolve_quadratic_form(&q0, t).unwrap();
    let err = |h: f64| {
        let steps = (t / h).round() as usize;
        let q = rk4_fixed(&q0, h, steps, |q| moment_rhs(q, &p.drift, &r));
        (q - exact).amax()
    };
    let (e1, e2, e3) = (err(0.2), err(0.1), err(0.05));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((12.0..=20.0).contains(&ratio), "error ratio {ratio}");
    }
}

#[test]
fn zero_duration_returns_start() {
    let (p, s0) = fig2();
    let s = integrate_moments(&p, &s0, 0.0, 1e-5).unwrap();
    assert!((s.sigma() - s0.sigma()).amax() < 1e-12);
}

#[test]
fn step_bound_tracks_fastest_rate() {
    let c = coefficients(&PhysicalParams::reference_bath(1.0, 15.0), RegimeTag::ExactFiniteT).unwrap();
    assert!((step_bound(&c) - 1e-3 / 61f64.sqrt()).abs() < 1e-15);
}
