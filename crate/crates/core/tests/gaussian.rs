use hpz_core::gaussian::*;
use hpz_core::oracle::{entropy_series, purity_det, schatten_series, symplectic_eigenvalues_invariants};
use hpz_core::propagator::{symplectic_form, Covariance4, Frame};
use hpz_core::scenario::{run_scenario, Scenario};
use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn symmetric(v: &[f64; 10]) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    let mut k = 0;
    for i in 0..4 {
        for j in i..4 {
            m[(i, j)] = v[k];
            m[(j, i)] = v[k];
            k += 1;
        }
    }
    m
}

/// exp(ΩH) is symplectic for symmetric H.
fn random_symplectic(h: &[f64; 10]) -> Matrix4<f64> {
    (symplectic_form() * symmetric(h)).exp()
}

/// Thermal product state ν₁ ⊕ ν₂ dressed by a symplectic map.
fn dressed_state(nu1: f64, nu2: f64, h: &[f64; 10]) -> Covariance4 {
    let s = random_symplectic(h);
    let d = Matrix4::from_diagonal(&Vector4::new(nu1, nu1, nu2, nu2));
    Covariance4::from_symmetrized(s * d * s.transpose(), Frame::Lab)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn symplectic_invariance(nu1 in 1.0f64..5.0, nu2 in 1.0f64..5.0, h in prop::array::uniform10(-0.6f64..0.6)) {
        let sigma = dressed_state(nu1, nu2, &h);
        let s = symplectic_eigenvalues(&sigma).unwrap();
        let (lo, hi) = if nu1 <= nu2 { (nu1, nu2) } else { (nu2, nu1) };
        prop_assert!((s.nu1 - lo).abs() < 1e-9 && (s.nu2 - hi).abs() < 1e-9);
        let s2 = random_symplectic(&h.map(|x| -0.7 * x));
        let moved = Covariance4::from_symmetrized(s2 * sigma.sigma() * s2.transpose(), Frame::Lab);
        let t = symplectic_eigenvalues(&moved).unwrap();
        prop_assert!((t.nu1 - s.nu1).abs() < 1e-9 && (t.nu2 - s.nu2).abs() < 1e-9);
    }

    #[test]
    fn invariant_route_agrees_off_degeneracy(nu1 in 1.0f64..3.0, gap in 0.1f64..2.0, h in prop::array::uniform10(-0.5f64..0.5)) {
        let sigma = dressed_state(nu1, nu1 + gap, &h);
        let s = symplectic_eigenvalues(&sigma).unwrap();
        let (a, b) = symplectic_eigenvalues_invariants(&sigma);
        prop_assert!((s.nu1 - a).abs() < 1e-8 && (s.nu2 - b).abs() < 1e-8);
    }

    #[test]
    fn purity_matches_determinant(nu1 in 1.0f64..4.0, nu2 in 1.0f64..4.0, h in prop::array::uniform10(-0.5f64..0.5)) {
        let sigma = dressed_state(nu1, nu2, &h);
        let p = purity(&symplectic_eigenvalues(&sigma).unwrap());
        prop_assert!((p - purity_det(&sigma)).abs() < 1e-9);
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
    }

    #[test]
    fn separability_consistency(nu1 in 1.0f64..3.0, nu2 in 1.0f64..3.0, h in prop::array::uniform10(-0.8f64..0.8)) {
        let sigma = dressed_state(nu1, nu2, &h);
        let pt = symplectic_eigenvalues(&partial_transpose(&sigma).unwrap()).unwrap();
        let en = log_negativity(&sigma, TOL).unwrap();
        prop_assert_eq!(en <= TOL, pt.nu1 >= 1.0 - TOL);
        if pt.nu2 >= 1.0 {
            prop_assert!((en - (-pt.nu1.log2()).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn mutual_information_nonnegative(nu1 in 1.0f64..3.0, nu2 in 1.0f64..3.0, h in prop::array::uniform10(-0.8f64..0.8)) {
        let sigma = dressed_state(nu1, nu2, &h);
        prop_assert!(mutual_information(&sigma, TOL).unwrap() >= -1e-9);
    }
}

#[test]
fn entropy_series_sample() {
    for i in 0..100 {
        let nu1 = 1.01 + 0.04 * i as f64;
        let nu2 = 1.01 + (4.0 * ((i * 37) % 100) as f64) / 100.0;
        let closed = entropy_total(&SymplecticSpectrum { nu1: nu1.min(nu2), nu2: nu1.max(nu2) }, TOL).unwrap();
        let series = entropy_series(nu1, nu2, 500);
        assert!((closed - series).abs() < 1e-8, "({nu1}, {nu2}): {closed} vs {series}");
    }
}

#[test]
fn schatten_series_sample() {
    for i in 0..100 {
        let nu1 = 0.2 + 0.012 * i as f64;
        let nu2 = 1.0 + 0.03 * ((i * 53) % 100) as f64;
        let closed = schatten_norm(&SymplecticSpectrum { nu1, nu2 });
        let series = schatten_series(nu1, nu2, 500);
        assert!((closed - series).abs() < 1e-8 * closed, "({nu1}, {nu2}): {closed} vs {series}");
    }
}

#[test]
fn entropy_series_at_spec_points() {
    let s = SymplecticSpectrum { nu1: 1.0, nu2: 3.0 };
    assert!((entropy_total(&s, TOL).unwrap() - entropy_series(1.0, 3.0, 200)).abs() < 1e-10);
    let s = SymplecticSpectrum { nu1: 1.2, nu2: 1.2 };
    assert!((entropy_total(&s, TOL).unwrap() - entropy_series(1.2, 1.2, 200)).abs() < 1e-10);
}

#[test]
fn epr_is_pure_for_p_one() {
    for r in [0.0, 0.5, 2.0] {
        let s = symplectic_eigenvalues(&epr_initial(1.0, r).unwrap()).unwrap();
        assert!((purity(&s) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn fig2_subsystem_entropies_oscillate_total_does_not() {
    let mut s = Scenario::preset("fig2").unwrap();
    s.grid.t_start = 30.0;
    s.grid.t_end = 50.0;
    s.grid.n_points = 801;
    let (_, reports) = run_scenario(&s).unwrap();
    let diff: Vec<f64> = reports.iter().map(|r| r.s_a.unwrap() - r.s_b.unwrap()).collect();
    let sign_changes = diff.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert!(sign_changes >= 4, "S_A - S_B sign changes: {sign_changes}");
    let total: Vec<f64> = reports.iter().map(|r| r.s_total.unwrap()).collect();
    let turns = total
        .windows(3)
        .filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < -1e-24)
        .count();
    assert_eq!(turns, 0);
}

/// The claim that ρ(0) is never separable is probed on a grid and reported.
#[test]
fn initial_state_separability_grid() {
    let mut separable = Vec::new();
    for i in 0..=12 {
        let r_s = 0.25 * i as f64;
        for j in 0..=20 {
            let p = 1.0 + 0.5 * j as f64;
            let lab = cmr_to_lab(&epr_initial(p, r_s).unwrap()).unwrap();
            let pt = symplectic_eigenvalues(&partial_transpose(&lab).unwrap()).unwrap();
            if pt.nu1 >= 1.0 - TOL {
                separable.push((p, r_s));
            }
        }
    }
    println!("separable initial states on the (p, r_s) grid: {}", separable.len());
    if let Some(first) = separable.first() {
        println!("first separable point: p = {}, r_s = {}", first.0, first.1);
    }
    // at r_s = 0 the lab-frame PT spectrum is (p/2, 2p)
    assert!(separable.contains(&(2.0, 0.0)));
    assert!(!separable.contains(&(1.5, 0.0)));
}
