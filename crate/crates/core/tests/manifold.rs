mod common;

use std::f64::consts::PI;

use common::*;
use glvortex_core::{
    inner_product, ComplexField, Complex64, FitOptions, Moduli, TangentModuli,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[test]
fn straight_filament_and_phase() {
    let m = model(0.1, 8);
    let g = m.grid().clone();
    let f0 = m.build_filament(&Moduli::straight(8)).unwrap();
    for &p in g.active() {
        for iz in 1..8 {
            assert_eq!(f0.at(p, iz), f0.at(p, 0));
        }
        let expect = m.profile().eval_vortex(g.position(p)).unwrap();
        assert_eq!(f0.at(p, 0), expect);
    }
    let fpi = m.build_filament(&Moduli::new(PI, glvortex_core::Curve::zero(8))).unwrap();
    for (a, b) in f0.values().iter().zip(fpi.values()) {
        assert!((a + b).norm() < 1e-15);
    }
}

#[test]
fn filament_norm_matches_planar_mass() {
    let m = model(0.1, 8);
    let mass = m.profile().mass(1.0).unwrap();
    for sigma in [Moduli::straight(8), wavy_moduli(8)] {
        let f = m.build_filament(&sigma).unwrap();
        let n2 = f.norm().powi(2);
        assert!(rel(n2, mass) < 0.02, "{n2} vs {mass}");
    }
}

#[test]
fn boundary_guard() {
    let m = model(0.1, 8);
    let far = Moduli::new(0.0, helix(8, 0.8));
    assert!(matches!(
        m.build_filament(&far),
        Err(glvortex_core::Error::FilamentTooClose { .. })
    ));
}

#[test]
fn tangent_map_closed_forms() {
    let m = model(0.1, 8);
    let frame = m.frame(&Moduli::straight(8)).unwrap();
    let mut gauge = TangentModuli::zeros(8);
    gauge.mu = 1.0;
    let t = frame.tangent_map(&gauge);
    let v = frame.field();
    for &p in m.grid().interior() {
        assert!((t.at(p, 2) - I * v.at(p, 2)).norm() < 1e-15);
    }
    let mut shift = TangentModuli::zeros(8);
    for x in shift.xi.iter_mut() {
        *x = [1.0, 0.0];
    }
    let t = frame.tangent_map(&shift);
    let [d1, _] = frame.gradient();
    for &p in m.grid().interior() {
        assert!((t.at(p, 5) + d1.at(p, 5)).norm() < 1e-15);
    }
}

#[test]
fn tangent_map_matches_finite_differences() {
    let m = model(0.1, 8);
    let sigma = wavy_moduli(8);
    let mut r = rng(7);
    let chi = random_tangent(8, &mut r).scaled(0.5);
    let frame = m.frame(&sigma).unwrap();
    let exact = frame.tangent_map(&chi);
    let f0 = m.build_filament(&sigma).unwrap();
    let mut errors = Vec::new();
    for s in [1e-3, 1e-4] {
        let f1 = m.build_filament(&sigma.advanced(&chi, s)).unwrap();
        let mut fd = f1.sub(&f0).unwrap().scaled(Complex64::new(1.0 / s, 0.0));
        fd.zero_boundary();
        errors.push(fd.sub(&exact).unwrap().norm() / exact.norm());
    }
    // First-order convergence in s.
    assert!(errors[0] < 0.05, "{errors:?}");
    let ratio = errors[0] / errors[1];
    assert!((5.0..20.0).contains(&ratio), "{errors:?}");
}

#[test]
fn adjointness() {
    let m = model(0.1, 8);
    let mut r = rng(11);
    let frame = m.frame(&wavy_moduli(8)).unwrap();
    for _ in 0..20 {
        let chi = random_tangent(8, &mut r);
        let phi = random_field(m.grid(), &mut r);
        let lhs = inner_product(&frame.tangent_map(&chi), &phi).unwrap();
        let rhs = chi.dot(&frame.adjoint_map(&phi).unwrap());
        assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{lhs} {rhs}");
    }
    let zero = frame.adjoint_map(&ComplexField::zeros(m.grid())).unwrap();
    assert_eq!(zero.norm(), 0.0);
    let straight = m.frame(&Moduli::straight(8)).unwrap();
    let own = straight.adjoint_map(straight.field()).unwrap();
    assert!(own.mu.abs() < 1e-14);
}

#[test]
fn symplectic_matrix_at_straight_filament() {
    let m = model(0.1, 8);
    let frame = m.frame(&Moduli::straight(8)).unwrap();
    let b = frame.symplectic_matrix();
    // Odd angular symmetry of the grid and the vortex.
    for iz in 0..8 {
        assert!(b.b21[iz].abs() < 1e-12 && b.b31[iz].abs() < 1e-12);
        assert!(b.b12[iz].abs() < 1e-12 && b.b13[iz].abs() < 1e-12);
        assert!(b.cross[iz].abs() < 1e-12);
        assert_eq!(b.diagonal[iz], [0.0, 0.0]);
        assert!((b.b23[iz] - b.b23[0]).abs() < 1e-14);
        assert_eq!(b.b32[iz], -b.b23[iz]);
    }
    // int <d1 psi, i d2 psi> = -int det(grad psi) = -pi phi(R)^2.
    let phi_r = m.profile().eval(1.0).unwrap();
    let oracle = -PI * phi_r * phi_r;
    assert!(rel(b.b23[0], oracle) < 0.02, "{} vs {oracle}", b.b23[0]);
}

#[test]
fn matrix_form_matches_composition() {
    let m = model(0.1, 8);
    let frame = m.frame(&wavy_moduli(8)).unwrap();
    let b = frame.symplectic_matrix();
    let mut r = rng(3);
    for _ in 0..10 {
        let chi = random_tangent(8, &mut r);
        let via_b = b.apply(&chi);
        let composed = frame
            .adjoint_map(&frame.tangent_map(&chi).scaled(I))
            .unwrap();
        let diff = via_b.lin_comb(1.0, &composed, -1.0).norm();
        assert!(diff <= 1e-10 * composed.norm(), "{diff}");
        // Antisymmetry of the induced form.
        assert!(via_b.dot(&chi).abs() <= 1e-10 * via_b.norm() * chi.norm());
        let chi2 = random_tangent(8, &mut r);
        let a = b.apply(&chi).dot(&chi2);
        let c = b.apply(&chi2).dot(&chi);
        assert!((a + c).abs() <= 1e-10 * (a.abs() + 1.0));
    }
}

#[test]
fn jsigma_solve() {
    let m = model(0.1, 8);
    let frame = m.frame(&wavy_moduli(8)).unwrap();
    let b = frame.symplectic_matrix();
    let mut r = rng(5);
    let zero = b.solve_jsigma(&TangentModuli::zeros(8)).unwrap();
    assert_eq!(zero.value.norm(), 0.0);
    for _ in 0..10 {
        let rhs = random_tangent(8, &mut r);
        let sol = b.solve_jsigma(&rhs).unwrap();
        assert!(sol.gauge_degenerate);
        let back = b.apply(&sol.value);
        for iz in 0..8 {
            for c in 0..2 {
                assert!((back.xi[iz][c] - rhs.xi[iz][c]).abs() < 1e-9);
            }
            // Cramer's rule on the slice block [[0, B23], [B32, 0]] acting on (xi1, xi2).
            let (m11, m12, m21, m22) = (0.0, b.b23[iz], b.b32[iz], 0.0);
            let det: f64 = m11 * m22 - m12 * m21;
            let x1 = (rhs.xi[iz][0] * m22 - m12 * rhs.xi[iz][1]) / det;
            let x2 = (m11 * rhs.xi[iz][1] - m21 * rhs.xi[iz][0]) / det;
            assert!((sol.value.xi[iz][0] - x1).abs() < 1e-12);
            assert!((sol.value.xi[iz][1] - x2).abs() < 1e-12);
        }
    }
    // The lambda row is annihilated by elimination: pivot is zero to rounding.
    assert!(b.lambda_pivot().abs() < 1e-12 * b.norm());
}

#[test]
fn projection_properties() {
    let m = model(0.1, 8);
    let frame = m.frame(&wavy_moduli(8)).unwrap();
    let mut r = rng(9);
    for _ in 0..5 {
        let phi = random_field(m.grid(), &mut r);
        let q = frame.project_q(&phi).unwrap();
        let qq = frame.project_q(&q).unwrap();
        assert!(qq.sub(&q).unwrap().norm() <= 1e-8 * phi.norm());
        let phi2 = random_field(m.grid(), &mut r);
        let lhs = inner_product(&q, &phi2.scaled(I)).unwrap();
        let rhs = inner_product(&phi, &frame.project_q(&phi2).unwrap().scaled(I)).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * (lhs.abs() + rhs.abs() + 1e-3), "{lhs} {rhs}");
        let mut chi = random_tangent(8, &mut r);
        chi.mu = 0.0;
        let t = frame.tangent_map(&chi);
        let qt = frame.project_q(&t).unwrap();
        assert!(qt.sub(&t).unwrap().norm() <= 1e-8 * t.norm());
        // The complement is annihilated by Q.
        let w = frame.orthogonal_complement(&phi, false).unwrap();
        assert!(frame.project_q(&w).unwrap().norm() <= 1e-10 * phi.norm());
    }
}

#[test]
fn moduli_fit_fixed_point_and_orthogonal_perturbations() {
    let m = model(0.1, 8);
    let star = wavy_moduli(8);
    let f = m.build_filament(&star).unwrap();
    let exact = m.moduli_fit(&f, &star, &FitOptions::default()).unwrap();
    assert_eq!(exact.iterations, 0);
    assert_eq!(exact.moduli, star);

    let frame = m.frame(&star).unwrap();
    let mut r = rng(21);
    let w = frame.orthogonal_complement(&random_field(m.grid(), &mut r), true).unwrap();
    let w = w.scaled(Complex64::new(1e-3 / w.norm(), 0.0));
    let u = f.add(&w).unwrap();
    let start = Moduli::new(star.lambda + 0.01, star.curve.translated([0.004, -0.003]));
    let fit = m.moduli_fit(&u, &start, &FitOptions::default()).unwrap();
    assert!(fit.residual <= 1e-10);
    assert!((fit.moduli.lambda - star.lambda).abs() < 1e-6);
    assert!(fit.moduli.curve.sup_distance(&star.curve) < 1e-6);
}

#[test]
fn moduli_fit_random_perturbation_beats_grid_search() {
    let m = model(0.1, 8);
    let star = wavy_moduli(8);
    let f = m.build_filament(&star).unwrap();
    let mut r = rng(33);
    let w = random_field(m.grid(), &mut r);
    let u = f.add(&w.scaled(Complex64::new(1e-3 / w.norm(), 0.0))).unwrap();
    let fit = m.moduli_fit(&u, &star, &FitOptions::default()).unwrap();
    assert!(fit.residual <= 1e-10);
    let found = m.fit_conditions(&u, &fit.moduli).unwrap().0.norm();
    let step = 2e-4;
    let mut best = f64::INFINITY;
    for a in -2..=2 {
        for b in -2..=2 {
            for c in -2..=2 {
                let trial = Moduli::new(
                    fit.moduli.lambda + a as f64 * step,
                    fit.moduli.curve.translated([b as f64 * step, c as f64 * step]),
                );
                let res = m.fit_conditions(&u, &trial).unwrap().0.norm();
                if (a, b, c) != (0, 0, 0) {
                    best = best.min(res);
                }
            }
        }
    }
    assert!(found < best);
}

#[test]
fn translation_covariance() {
    let m = model(0.1, 8);
    let g = m.grid().clone();
    let h = g.h_x();
    let n = g.n_x();
    let f0 = m.build_filament(&Moduli::straight(8)).unwrap();
    let shifted = m
        .build_filament(&Moduli::new(0.0, glvortex_core::Curve::constant(8, [3.0 * h, -2.0 * h])))
        .unwrap();
    for &p in g.interior() {
        let Some(q) = (p + 2).checked_sub(3 * n) else { continue };
        if g.compact_index(q).is_some() {
            let d = (shifted.at(p, 0) - f0.at(q, 0)).norm();
            assert!(d < 1e-12, "{d}");
        }
    }
}

#[test]
fn immersion_and_uniform_bound() {
    let m = model(0.1, 8);
    let mut r = rng(41);
    for sigma in [Moduli::straight(8), wavy_moduli(8)] {
        let frame = m.frame(&sigma).unwrap();
        for _ in 0..10 {
            let chi = random_tangent(8, &mut r);
            let ratio = frame.tangent_map(&chi).norm() / chi.norm();
            assert!(ratio > 0.3 && ratio < 3.0 * (0.1f64).ln().abs().sqrt(), "{ratio}");
        }
    }
}
