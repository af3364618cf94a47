use std::f64::consts::PI;

use glvortex_core::{solve_profile, RadialProfile};

fn profile(eps: f64) -> RadialProfile {
    solve_profile(eps, 2.0, 4096).unwrap()
}

// Reference values from an independent collocation solve (adaptive mesh,
// same far-field slope condition at r = 2), integrated on the unit disc.
const ORACLE: [(f64, f64, f64, f64); 3] = [
    // (eps, energy - pi |log eps|, phi(0.5), int |d1 psi|^2)
    (0.2, 1.2259, 0.87497, 4.747),
    (0.1, 1.2043, 0.97662, 6.875),
    (0.05, 1.1985, 0.99487, 9.041),
];

#[test]
fn matches_independent_solver() {
    for (eps, excess, phi_half, stiffness) in ORACLE {
        let p = profile(eps);
        let e = p.planar_energy(1.0).unwrap();
        assert!((e - PI * eps.ln().abs() - excess).abs() < 2e-3, "eps {eps}: {e}");
        assert!((p.eval(0.5).unwrap() - phi_half).abs() < 1e-4);
        assert!((p.translation_stiffness(1.0).unwrap() - stiffness).abs() < 2e-3);
    }
}

#[test]
fn far_field_asymptotics() {
    let eps = 0.05;
    let p = profile(eps);
    assert!((p.eval(0.5).unwrap() - (1.0 - eps * eps / 0.5)).abs() < 1e-3);
    for r in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let phi = p.eval(r).unwrap();
        let tail = 1.0 - eps * eps / (2.0 * r * r);
        assert!((phi - tail).abs() / (1.0 - phi) <= 0.1, "r {r}");
    }
    assert!(p.phi[p.phi.len() - 1] >= 1.0 - eps * eps / (2.0 * 4.0) - 1e-6);
}

#[test]
fn core_is_linear_with_scale_free_shape() {
    // phi(r) = F(r / eps) for the whole-plane profile; the finite disc only
    // perturbs this at order eps^2.
    let a = profile(0.1);
    let b = profile(0.05);
    for s in [0.1, 0.5, 1.0, 2.0] {
        assert!((a.eval(0.1 * s).unwrap() - b.eval(0.05 * s).unwrap()).abs() < 1e-3);
    }
    assert_eq!(a.eval(0.0).unwrap(), 0.0);
}

#[test]
fn energy_bounds_are_uniform() {
    let mut excess = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let p = profile(eps);
        let parts = p.planar_energy_parts(1.0).unwrap();
        excess.push(parts.total() - PI * eps.ln().abs());
        // Potential part and eps |grad psi|_inf stay bounded.
        assert!(4.0 * parts.potential < 7.0);
        assert!(eps * p.max_gradient() < 1.0);
        let ratio = (2.0 * parts.kinetic) / eps.ln().abs();
        assert!((5.0..7.0).contains(&ratio), "{ratio}");
        assert!(p.phi.iter().all(|v| v.abs() <= 1.0));
    }
    let spread = excess.iter().cloned().fold(f64::MIN, f64::max)
        - excess.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread / excess[0] < 0.15);
    assert!(excess.iter().all(|&c| (0.0..=5.0).contains(&c)));
}

#[test]
fn oscillation_control() {
    let eps = 0.05;
    let p = profile(eps);
    for big_r in [0.25, 0.5] {
        let base = p.eval(big_r).unwrap();
        let worst = (0..=20)
            .map(|k| big_r + k as f64 * (1.0 - big_r) / 20.0)
            .map(|r| (p.eval(r).unwrap() - base).abs())
            .fold(0.0, f64::max);
        assert!(worst <= eps * eps / (big_r * big_r));
    }
}

#[test]
fn refinement_changes_energy_little() {
    let coarse = solve_profile(0.1, 2.0, 1024).unwrap();
    let fine = solve_profile(0.1, 2.0, 8192).unwrap();
    let d = (coarse.planar_energy(1.0).unwrap() - fine.planar_energy(1.0).unwrap()).abs();
    assert!(d < 1e-4, "{d}");
}
