mod common;

use std::f64::consts::PI;

use common::{helix, model, rel};
use glvortex_core::bnf::translation_stiffness;
use glvortex_core::{bnf_rhs, bnf_step, effective_rhs, effective_step, Complex64, Curve, Moduli};

const W: f64 = 2.0 * PI;

/// Rigid rotation rate of a helix of radius `a` under the graph flow.
fn helix_rate(a: f64) -> f64 {
    W * W / (1.0 + (W * a).powi(2)).sqrt()
}

#[test]
fn helix_rotates_rigidly_under_bnf() {
    let a = 0.01;
    let n = 16;
    let dt = 1e-3;
    let steps = 160;
    let mut c = helix(n, a);
    for _ in 0..steps {
        c = bnf_step(&c, dt).unwrap();
    }
    let t = dt * steps as f64;
    let expect = Complex64::from_polar(a, -helix_rate(a) * t);
    let got = c.mode_coefficient(1);
    assert!((got - expect).norm() < 1e-6 * a, "{got} vs {expect}");
    for m in [-1, 0, 2, 3] {
        assert!(c.mode_coefficient(m).norm() < 1e-12);
    }
}

#[test]
fn bnf_preserves_length_and_is_rotation_equivariant() {
    let c = common::wavy_moduli(16).curve;
    let mut d = c.clone();
    for _ in 0..100 {
        d = bnf_step(&d, 1e-3).unwrap();
    }
    assert!(rel(c.length(), d.length()) < 1e-6);
    let v = bnf_rhs(&c.rotated(0.9)).unwrap();
    let w = bnf_rhs(&c).unwrap().rotated(0.9);
    assert!(v.sup_distance(&w) < 1e-12);
}

#[test]
fn time_step_bound_is_enforced() {
    let c = helix(16, 0.01);
    assert!(bnf_step(&c, 0.5 / 256.0).is_ok());
    assert!(bnf_step(&c, 0.5 / 256.0 * 1.01).is_err());
}

#[test]
fn effective_dynamics_of_straight_filament_vanish() {
    let m = model(0.1, 8);
    let r = effective_rhs(&m, &Moduli::new(0.3, Curve::constant(8, [0.05, -0.02]))).unwrap();
    assert!(r.gauge_degenerate);
    assert!(r.value.xi_sup() < 1e-10, "{}", r.value.xi_sup());
    assert!(r.d_sigma_e.mu.abs() < 1e-6, "{}", r.d_sigma_e.mu);
}

#[test]
fn effective_velocity_is_binormal_flow_scaled_by_stiffness_over_flux() {
    let m = model(0.1, 8);
    let a = 0.01;
    let sigma = Moduli::new(0.0, helix(8, a));
    let frame = m.frame(&sigma).unwrap();
    let stiffness = translation_stiffness(&frame);
    let b = frame.symplectic_matrix();
    let flux = -b.b23.iter().sum::<f64>() / 8.0;
    let ratio = stiffness / flux;

    let r = effective_rhs(&m, &sigma).unwrap();
    let bnf = bnf_rhs(&sigma.curve).unwrap();
    let scaled = Curve {
        points: bnf.points.iter().map(|p| [ratio * p[0], ratio * p[1]]).collect(),
    };
    let eff = r.value.xi_curve();
    let err = eff.sup_distance(&scaled) / scaled.sup_norm();
    assert!(err < 0.05, "relative deviation {err}");
    // The curvature-squared term is quadratic in the amplitude.
    let tc = r.curvature_term.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    assert!(tc < 0.1 * stiffness * W * W * a, "{tc}");
}

#[test]
fn effective_step_rotates_helix_at_scaled_rate() {
    let m = model(0.1, 8);
    let a = 0.01;
    let sigma = Moduli::new(0.0, helix(8, a));
    let frame = m.frame(&sigma).unwrap();
    let ratio = translation_stiffness(&frame) / (-frame.symplectic_matrix().b23[0]);
    let dt = 2e-3;
    let mut s = sigma;
    for _ in 0..5 {
        s = effective_step(&m, &s, dt).unwrap();
    }
    let c = s.curve.mode_coefficient(1);
    let rate = -c.arg() / (5.0 * dt);
    assert!(rel(rate, ratio * W * W) < 0.05, "{rate} vs {}", ratio * W * W);
    assert!(rel(c.norm(), a) < 0.02);
}
