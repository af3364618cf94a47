mod common;

use std::sync::Arc;

use common::{helix, model, random_field, rng, wavy_moduli};
use glvortex_core::linearized::{
    apply_n, coercivity_gap, planar_gap, smallest_eigenvalue, unprojected_minimum,
    zero_mode_residuals, random_start, ComplementProjector, EigenOptions, LinearOperator,
};
use glvortex_core::{
    energy, gl_gradient, inner_product, solve_profile, ComplexField, Complex64, Error,
    FilamentModel, Grid, GridSpec, Moduli,
};
use nalgebra::{DMatrix, SymmetricEigen};

fn norm(f: &ComplexField) -> f64 {
    inner_product(f, f).unwrap().sqrt()
}

fn model_on(eps: f64, n_x: usize) -> FilamentModel {
    let grid = Grid::new(GridSpec::new(1.0, n_x, 8).unwrap()).unwrap();
    let profile = Arc::new(solve_profile(eps, 2.0, 4096).unwrap());
    FilamentModel::new(grid, profile).unwrap()
}

#[test]
fn operator_is_symmetric_at_nonzero_gauge() {
    let m = model(0.2, 8);
    let op = LinearOperator::new(&m, &wavy_moduli(8)).unwrap();
    let mut r = rng(11);
    for _ in 0..4 {
        let a = random_field(m.grid(), &mut r);
        let b = random_field(m.grid(), &mut r);
        let lab = inner_product(&op.apply(&a).unwrap(), &b).unwrap();
        let alb = inner_product(&a, &op.apply(&b).unwrap()).unwrap();
        let scale = norm(&op.apply(&a).unwrap()) * norm(&b);
        assert!((lab - alb).abs() <= 1e-12 * scale, "{lab} vs {alb}");
    }
}

#[test]
fn quadratic_form_matches_energy_second_difference() {
    let m = model(0.2, 8);
    let sigma = wavy_moduli(8);
    let op = LinearOperator::new(&m, &sigma).unwrap();
    let v = m.build_filament(&sigma).unwrap();
    let mut r = rng(5);
    for _ in 0..3 {
        let phi = random_field(m.grid(), &mut r);
        let s = 1e-3;
        let e = |t: f64| energy(&v.lin_comb(Complex64::new(1.0, 0.0), &phi, Complex64::new(t, 0.0)).unwrap(), 0.2);
        let fd = (e(s) - 2.0 * e(0.0) + e(-s)) / (s * s);
        let q = op.quadratic_form(&phi).unwrap();
        assert!((fd - q).abs() <= 0.01 * q.abs(), "{fd} vs {q}");
    }
}

#[test]
fn quadratic_form_obeys_pointwise_bounds() {
    let eps = 0.2;
    let m = model(eps, 8);
    let op = LinearOperator::new(&m, &wavy_moduli(8)).unwrap();
    let free = |phi: &ComplexField| {
        let lap = glvortex_core::laplacian(phi);
        -inner_product(&lap, phi).unwrap()
    };
    let mut r = rng(2);
    for _ in 0..4 {
        let phi = random_field(m.grid(), &mut r);
        let q = op.quadratic_form(&phi).unwrap();
        let k = free(&phi);
        let n2 = norm(&phi).powi(2) / (eps * eps);
        assert!(q <= k + 2.0 * n2 + 1e-9 * k);
        assert!(q >= k - n2 - 1e-9 * k);
    }
}

#[test]
fn nonzero_trace_is_rejected() {
    let m = model(0.2, 8);
    let op = LinearOperator::new(&m, &Moduli::straight(8)).unwrap();
    let v = m.build_filament(&Moduli::straight(8)).unwrap();
    assert!(matches!(op.apply(&v), Err(Error::NonzeroTrace(_))));
    assert!(matches!(apply_n(&v, &v, 0.2), Err(Error::NonzeroTrace(_))));
}

#[test]
fn remainder_completes_the_taylor_expansion() {
    let eps = 0.2;
    let m = model(eps, 8);
    let sigma = wavy_moduli(8);
    let op = LinearOperator::new(&m, &sigma).unwrap();
    let v = m.build_filament(&sigma).unwrap();
    assert_eq!(norm(&apply_n(&v, &ComplexField::zeros(m.grid()), eps).unwrap()), 0.0);
    let mut r = rng(9);
    let w = random_field(m.grid(), &mut r).scaled(Complex64::new(0.05, 0.0));
    let vw = v.add(&w).unwrap();
    let mut defect = gl_gradient(&vw, eps).sub(&gl_gradient(&v, eps)).unwrap();
    defect = defect.sub(&op.apply(&w).unwrap()).unwrap();
    defect = defect.sub(&apply_n(&v, &w, eps).unwrap()).unwrap();
    let scale = norm(&gl_gradient(&vw, eps));
    assert!(norm(&defect) <= 1e-9 * scale.max(1.0), "{}", norm(&defect));

    let n1 = norm(&apply_n(&v, &w.scaled(Complex64::new(1e-2, 0.0)), eps).unwrap());
    let n2 = norm(&apply_n(&v, &w.scaled(Complex64::new(1e-3, 0.0)), eps).unwrap());
    let ratio = n1 / n2;
    assert!((ratio - 100.0).abs() < 2.0, "{ratio}");
}

#[test]
fn zero_mode_residuals_refine_at_second_order() {
    let coarse = model_on(0.2, 41);
    let fine = model_on(0.2, 81);
    let straight = Moduli::straight(8);
    let rc = zero_mode_residuals(&LinearOperator::new(&coarse, &straight).unwrap()).unwrap();
    let rf = zero_mode_residuals(&LinearOperator::new(&fine, &straight).unwrap()).unwrap();
    for (c, f) in rc.translation.iter().zip(&rf.translation) {
        assert!(c / f > 3.0, "{c} -> {f}");
    }
    assert!(rc.gauge / rf.gauge > 3.0, "{} -> {}", rc.gauge, rf.gauge);
}

#[test]
fn gauge_residual_is_gauge_invariant() {
    let m = model(0.2, 8);
    let c = helix(8, 0.02);
    let r0 = zero_mode_residuals(&LinearOperator::new(&m, &Moduli::new(0.0, c.clone())).unwrap()).unwrap();
    let r1 = zero_mode_residuals(&LinearOperator::new(&m, &Moduli::new(1.3, c)).unwrap()).unwrap();
    assert!((r0.gauge - r1.gauge).abs() <= 1e-10 * r0.gauge);
    assert!((r0.translation[0] - r1.translation[0]).abs() <= 1e-10 * r0.translation[0]);
}

#[test]
fn translation_residual_grows_with_curvature() {
    let m = model(0.2, 8);
    let res = |a: f64| {
        let op = LinearOperator::new(&m, &Moduli::new(0.0, helix(8, a))).unwrap();
        zero_mode_residuals(&op).unwrap().translation[0]
    };
    let (r0, r1, r2) = (res(0.0), res(0.02), res(0.04));
    assert!(r0 < r1 && r1 < r2);
    assert!(r2 - r0 <= 2.5 * (r1 - r0), "{r0} {r1} {r2}");
}

/// Dense oracle on a tiny planar problem: the smallest eigenvalue of
/// `P L P + c (1 - P)` on `z`-independent fields.
#[test]
fn iterative_gap_matches_dense_eigensolver() {
    let m = model_on(0.25, 21);
    let grid = Arc::clone(m.grid());
    let nz = grid.n_z();
    let op = LinearOperator::new(&m, &Moduli::straight(8)).unwrap();
    let frame = op.frame();
    let mut v = frame.field().clone();
    v.zero_boundary();
    let [d1, d2] = frame.gradient();
    let i = Complex64::i();
    let projector =
        ComplementProjector::from_fields(vec![v.scaled(i), v.clone(), d1.scaled(i), d2.scaled(i)], true).unwrap();

    // Orthonormal real basis of z-constant fields.
    let interior = grid.interior().to_vec();
    let basis: Vec<ComplexField> = interior
        .iter()
        .flat_map(|&p| [Complex64::new(1.0, 0.0), i].map(|c| (p, c)))
        .map(|(p, c)| {
            let mut f = ComplexField::zeros(&grid);
            for iz in 0..nz {
                f.values_mut()[p * nz + iz] = c;
            }
            let n = norm(&f);
            f.scaled(Complex64::new(1.0 / n, 0.0))
        })
        .collect();
    let big = 1e6;
    let images: Vec<ComplexField> = basis
        .iter()
        .map(|b| {
            let pb = projector.apply(b);
            let mut out = projector.apply(&op.apply(&pb).unwrap());
            let rest = b.sub(&pb).unwrap();
            out.axpy(Complex64::new(big, 0.0), &rest).unwrap();
            out
        })
        .collect();
    let n = basis.len();
    let dense = DMatrix::from_fn(n, n, |a, b| inner_product(&basis[a], &images[b]).unwrap());
    let sym = (&dense + dense.transpose()) * 0.5;
    let oracle = SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);

    let opts = EigenOptions {
        tol: 1e-6,
        ..EigenOptions::default()
    };
    let start = random_start(&grid, 3);
    let est = smallest_eigenvalue(&op, &projector, &start, &opts).unwrap();
    assert!((est.value - oracle).abs() <= 1e-8 * oracle.abs().max(1.0), "{} vs {oracle}", est.value);
}

#[test]
fn coercivity_gap_is_positive_and_planar_on_small_curves() {
    let eps = 0.1;
    let m = model(eps, 8);
    let opts = EigenOptions::default();
    let beta = planar_gap(&m, &opts).unwrap();
    assert!(beta.value > 0.0);
    let delta = eps.powf(1.5);
    let a = delta / (1.0 + 2.0 * std::f64::consts::PI + 4.0 * std::f64::consts::PI.powi(2));
    let op = LinearOperator::new(&m, &Moduli::new(0.0, helix(8, a))).unwrap();
    let alpha = coercivity_gap(&op, &opts).unwrap();
    assert!(alpha.value > 0.0);
    assert!(alpha.residual <= opts.tol);
    assert!((alpha.value - beta.value).abs() <= 0.05 * beta.value, "{} vs {}", alpha.value, beta.value);
    let free = unprojected_minimum(&op, &opts).unwrap();
    assert!(free.value < 0.1 * alpha.value, "{} vs {}", free.value, alpha.value);
}

#[test]
fn eigensolver_reports_non_convergence() {
    let m = model(0.2, 8);
    let op = LinearOperator::new(&m, &Moduli::straight(8)).unwrap();
    let opts = EigenOptions {
        max_iterations: 1,
        ..EigenOptions::default()
    };
    assert!(matches!(
        coercivity_gap(&op, &opts),
        Err(Error::EigenNotConverged { iterations: 1, .. })
    ));
}
