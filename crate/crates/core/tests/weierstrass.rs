use std::f64::consts::PI;

use bloch_core::torus::{PeriodicScalarField, TorusLattice, TWO_PI};
use bloch_core::weierstrass::{
    closedness_residual, dirac_residual, encode, decode, integrate_immersion, metric_defect,
    shift_to_kernel, spinor_from_modes, willmore, SpinorField, WeierstrassError,
    CLOSEDNESS_THRESHOLD,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cosine_potential(nmax: usize, grid: usize) -> PeriodicScalarField {
    let lattice = TorusLattice::unit_square(nmax, grid).unwrap();
    PeriodicScalarField::from_real_fn(&lattice, |s| 1.0 + 0.3 * (TWO_PI * s[1]).cos())
}

fn random_spinor(lattice: &TorusLattice, seed: u64) -> SpinorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = || -> Vec<([i64; 2], Complex64)> {
        (-2..=2)
            .flat_map(|a| (-2..=2).map(move |b| [a, b]))
            .map(|n| (n, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
            .collect()
    };
    let (m1, m2) = (modes(), modes());
    spinor_from_modes(lattice, [PI, 0.0], &m1, &m2).unwrap()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

type M = [Complex64; 4];

fn mul(a: &M, b: &M) -> M {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn adjoint(a: &M) -> M {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

#[test]
fn constant_potential_cylinder() {
    // ψ = e^{iπx}(1, i) solves the equation for U = π/2; the surface is a
    // round cylinder of radius 1/π with axial period 2.
    let lattice = TorusLattice::unit_square(1, 16).unwrap();
    let u = PeriodicScalarField::constant(&lattice, c(PI / 2.0, 0.0));
    let spinor =
        spinor_from_modes(&lattice, [PI, 0.0], &[([0, 0], c(1.0, 0.0))], &[([0, 0], c(0.0, 1.0))]).unwrap();
    assert!(dirac_residual(&u, &spinor).unwrap() < 1e-13);
    assert!(closedness_residual(&spinor).unwrap() < 1e-12);

    let mesh = integrate_immersion(&spinor, &u, (0, 0), [0.0; 3], CLOSEDNESS_THRESHOLD).unwrap();
    assert!(dist(mesh.periods[0], [0.0; 3]) < 1e-12);
    assert!((mesh.periods[1][2].abs() - 2.0).abs() < 1e-12);
    assert!(mesh.periods[1][0].abs() < 1e-12 && mesh.periods[1][1].abs() < 1e-12);
    let g = mesh.grid_size;
    let center: [f64; 2] = {
        let mut acc = [0.0; 2];
        for r in 0..g {
            let v = mesh.vertex(r, 0);
            acc[0] += v[0] / g as f64;
            acc[1] += v[1] / g as f64;
        }
        acc
    };
    for r in 0..=g {
        for col in 0..=g {
            let v = mesh.vertex(r, col);
            let radius = ((v[0] - center[0]).powi(2) + (v[1] - center[1]).powi(2)).sqrt();
            assert!((radius - 1.0 / PI).abs() < 1e-12);
        }
    }
    for h in &mesh.mean_curvature {
        assert!((h.unwrap() - PI / 2.0).abs() < 1e-13);
    }
    let w = willmore(&u, Some(&mesh)).unwrap();
    assert!((w.direct - PI * PI).abs() < 1e-12);
    assert!(w.relative_gap().unwrap() < 1e-10);
}

#[test]
fn kernel_spinors_integrate_to_closed_forms() {
    let u = cosine_potential(6, 32);
    for kappa in [[0.0, 0.0], [PI, 0.0], [0.0, PI], [PI, PI]] {
        let (shifted, _, spinor) = shift_to_kernel(&u, kappa).unwrap();
        assert!(dirac_residual(&shifted, &spinor).unwrap() < 1e-7, "{kappa:?}");
        assert!(closedness_residual(&spinor).unwrap() < 1e-7);
        let mesh = integrate_immersion(&spinor, &shifted, (0, 0), [0.0; 3], CLOSEDNESS_THRESHOLD).unwrap();
        assert!(mesh.path_defect < 1e-8, "{}", mesh.path_defect);
        assert!(mesh.period_spread[0] < 1e-8 && mesh.period_spread[1] < 1e-8);
        assert_eq!(mesh.degenerate_cells(), 0);
        let w = willmore(&shifted, Some(&mesh)).unwrap();
        assert!(w.relative_gap().unwrap() < 1e-10);
        for (mu, k) in mesh.multipliers.values().iter().zip(kappa) {
            assert!((mu - c(k.cos(), 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn random_spinor_is_rejected() {
    let lattice = TorusLattice::unit_square(2, 32).unwrap();
    let u = PeriodicScalarField::constant(&lattice, c(1.0, 0.0));
    let spinor = random_spinor(&lattice, 11);
    assert!(closedness_residual(&spinor).unwrap() > 1e-2);
    assert!(dirac_residual(&u, &spinor).unwrap() > 1e-2);
    assert!(matches!(
        integrate_immersion(&spinor, &u, (0, 0), [0.0; 3], CLOSEDNESS_THRESHOLD),
        Err(WeierstrassError::NotClosed { .. })
    ));
}

#[test]
fn translation_moves_the_mesh_rigidly() {
    let u = cosine_potential(6, 32);
    let (shifted, _, spinor) = shift_to_kernel(&u, [PI, PI]).unwrap();
    let a = integrate_immersion(&spinor, &shifted, (0, 0), [0.0; 3], CLOSEDNESS_THRESHOLD).unwrap();
    let x0 = [1.5, -2.0, 0.25];
    let b = integrate_immersion(&spinor, &shifted, (3, 5), x0, CLOSEDNESS_THRESHOLD).unwrap();
    assert!(dist(b.vertex(3, 5), x0) < 1e-14);
    let t = {
        let (p, q) = (a.vertex(0, 0), b.vertex(0, 0));
        [q[0] - p[0], q[1] - p[1], q[2] - p[2]]
    };
    for (p, q) in a.vertices.iter().zip(&b.vertices) {
        assert!(dist([p[0] + t[0], p[1] + t[1], p[2] + t[2]], *q) < 1e-13);
    }
}

#[test]
fn su2_action_rotates_the_surface() {
    let u = cosine_potential(6, 32);
    let (shifted, _, spinor) = shift_to_kernel(&u, [PI, 0.0]).unwrap();
    let (alpha, beta) = (c(0.6, 0.48), c(-0.28, 0.576));
    let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
    let (alpha, beta) = (alpha / norm, beta / norm);
    let a: M = [alpha, -beta.conj(), beta, alpha.conj()];
    let rotated = spinor.su2_rotated([[a[0], a[1]], [a[2], a[3]]]).unwrap();
    assert!(closedness_residual(&rotated).unwrap() < 1e-7);
    assert_eq!(rotated.multipliers(), spinor.multipliers());

    let before = integrate_immersion(&spinor, &shifted, (0, 0), [0.0; 3], CLOSEDNESS_THRESHOLD).unwrap();
    let after = integrate_immersion(&rotated, &shifted, (0, 0), [0.0; 3], CLOSEDNESS_THRESHOLD).unwrap();
    for (p, q) in before.vertices.iter().zip(&after.vertices) {
        let expected = decode(&mul(&mul(&a, &encode(*p)), &adjoint(&a)));
        assert!(dist(expected, *q) < 1e-9);
        // Rotations preserve distance to the base vertex.
        let (np, nq) = (dist(*p, [0.0; 3]), dist(*q, [0.0; 3]));
        assert!((np - nq).abs() < 1e-9);
    }
}

#[test]
fn induced_metric_is_second_order() {
    let u = cosine_potential(6, 32);
    let (_, lambda, spinor) = shift_to_kernel(&u, [0.0, PI]).unwrap();
    let mut defects = Vec::new();
    for grid in [32, 64] {
        let s = spinor.with_grid_size(grid).unwrap();
        let v = cosine_potential(6, grid).add_constant(c(-lambda, 0.0));
        let mesh = integrate_immersion(&s, &v, (0, 0), [0.0; 3], CLOSEDNESS_THRESHOLD).unwrap();
        defects.push(metric_defect(&mesh, &s));
    }
    let order = (defects[0] / defects[1]).log2();
    assert!(order >= 1.9, "{defects:?} order {order}");
}

#[test]
fn willmore_of_simple_potentials() {
    let lattice = TorusLattice::unit_square(2, 32).unwrap();
    let u = PeriodicScalarField::from_real_fn(&lattice, |s| (TWO_PI * s[0]).cos());
    let w = willmore(&u, None).unwrap();
    assert!((w.direct - 2.0).abs() < 1e-14);
    assert!(w.geometric.is_none());

    let oblique = TorusLattice::planar(c(1.0, 0.0), c(0.3, 1.0), 2, 16).unwrap();
    for cc in [0.5, 1.0, 2.0] {
        let u = PeriodicScalarField::constant(&oblique, c(cc, 0.0));
        assert!((willmore(&u, None).unwrap().direct - 4.0 * cc * cc).abs() < 1e-13);
    }
    let complex = PeriodicScalarField::constant(&lattice, c(1.0, 0.5));
    assert_eq!(willmore(&complex, None), Err(WeierstrassError::ComplexPotential));
}

// Curvature read off the surface must agree pointwise with 2U e^{-α}
// from the spinor; a mismatched potential breaks the integral identity.
#[test]
fn surface_curvature_matches_the_potential() {
    let lattice = TorusLattice::planar(c(1.0, 0.0), c(0.25, 1.1), 6, 32).unwrap();
    let u = PeriodicScalarField::from_real_fn(&lattice, |s| 0.8 + 0.3 * (TWO_PI * s[1]).cos());
    let (shifted, _, spinor) = shift_to_kernel(&u, [PI, PI]).unwrap();
    let mesh = integrate_immersion(&spinor, &shifted, (0, 0), [0.0; 3], CLOSEDNESS_THRESHOLD).unwrap();
    let us = shifted.to_real_samples();
    let [p1, p2] = spinor.samples();
    let mut worst: f64 = 0.0;
    for k in 0..us.len() {
        let e_alpha = p1[k].norm_sqr() + p2[k].norm_sqr();
        let h = mesh.mean_curvature[k].unwrap();
        worst = worst.max((h.abs() - (2.0 * us[k] / e_alpha).abs()).abs());
        let da = e_alpha * e_alpha * lattice.volume();
        assert!((mesh.area_element[k] - da).abs() < 1e-9 * da);
    }
    assert!(worst < 1e-8, "{worst}");
    let w = willmore(&shifted, Some(&mesh)).unwrap();
    assert!(w.relative_gap().unwrap() < 1e-10);
    let wrong = willmore(&u, Some(&mesh)).unwrap();
    assert!(wrong.relative_gap().unwrap() > 1e-3);
}

#[test]
fn non_spin_quasimomentum_is_rejected() {
    let u = cosine_potential(2, 16);
    assert!(matches!(
        shift_to_kernel(&u, [0.5, 0.0]),
        Err(WeierstrassError::NonRealMultiplier(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closedness_is_quadratic_in_the_spinor(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        prop_assume!(re.abs() + im.abs() > 0.1);
        let lattice = TorusLattice::unit_square(2, 32).unwrap();
        let spinor = random_spinor(&lattice, seed);
        let factor = c(re, im);
        let base = closedness_residual(&spinor).unwrap();
        let scaled = closedness_residual(&spinor.scaled(factor)).unwrap();
        prop_assert!((scaled - factor.norm_sqr() * base).abs() < 1e-10 * scaled);
    }
}
