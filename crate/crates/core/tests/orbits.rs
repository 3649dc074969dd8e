use std::f64::consts::{PI, SQRT_2};

use brake_index::orbits::*;
use brake_index::Tolerances;

fn libration_periods(a: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = a.iter().map(|x| 2.0 * PI / (SQRT_2 * x)).collect();
    p.sort_by(|x, y| x.partial_cmp(y).unwrap());
    p
}

#[test]
fn planar_ellipsoid_has_two_symmetric_classes() {
    let a = [1.0, SQRT_2];
    let ham = GaugeHamiltonian::weighted_quadratic(&a, 1.0).unwrap();
    let e = enumerate_brake_orbits(&ham, &EnumerateOptions::default()).unwrap();
    assert_eq!(e.classes.len(), 2, "{:?}", e.classes.iter().map(|c| c.orbit.period).collect::<Vec<_>>());
    assert_eq!(e.resonant, Some(false));
    for (c, tau) in e.classes.iter().zip(libration_periods(&a)) {
        assert!((c.orbit.period - tau).abs() < 1e-8);
        assert_eq!(c.symmetry.class, Symmetry::Symmetric);
    }
}

#[test]
fn sphere_is_flagged_resonant() {
    let ham = GaugeHamiltonian::sphere(2, 2.0, 1.0).unwrap();
    let mut opts = EnumerateOptions::default();
    opts.grid_density = 16;
    let e = enumerate_brake_orbits(&ham, &opts).unwrap();
    assert_eq!(e.resonant, Some(true));
    // antipodal directions give the same great circle
    assert_eq!(e.classes.len(), 8);
}

#[test]
fn sphere_linearization_is_a_rotation() {
    let ham = GaugeHamiltonian::sphere(1, 2.0, 1.0).unwrap();
    let o = shoot_from_direction(&ham, &[1.0], &ShootOptions::default()).unwrap();
    let g = linearized_path(&o, &ham).unwrap();
    assert!((g.tau() - PI / 2.0).abs() < 1e-9);
    // R(π) = −I
    let end = g.end();
    assert!((end + brake_index::linalg::Mat::identity(2, 2)).amax() < 1e-8);
    let idx = orbit_indices(&g, 1, &Tolerances::default()).unwrap();
    assert_eq!(idx.l0.nu, 1);
    assert!(idx.bott_holds);
}

#[test]
fn ellipsoid_orbit_iterates_are_monotone() {
    let ham = GaugeHamiltonian::weighted_quadratic(&[1.0, SQRT_2], 1.0).unwrap();
    let tol = Tolerances::default();
    for q0 in [[1.0, 0.0], [0.0, 1.0]] {
        let o = shoot_from_direction(&ham, &q0, &ShootOptions::default()).unwrap();
        let g = linearized_path(&o, &ham).unwrap();
        let mut last = i64::MIN;
        for m in 1..=4 {
            let idx = orbit_indices(&g, m, &tol).unwrap();
            assert!(idx.bott_holds, "m = {m}: {idx:?}");
            assert!(idx.l0.i > last);
            last = idx.l0.i;
        }
        let chk = orbit_checks(&g, &tol).unwrap();
        assert!(chk.holds, "{chk:?}");
    }
}

#[test]
fn power_hamiltonian_orbit_indices() {
    let ham = GaugeHamiltonian::sphere(1, 3.0, 1.0).unwrap();
    let o = shoot_from_direction(&ham, &[1.0], &ShootOptions::default()).unwrap();
    let g = linearized_path(&o, &ham).unwrap();
    let idx = orbit_indices(&g, 1, &Tolerances::default()).unwrap();
    assert!(idx.bott_holds, "{idx:?}");
}

#[test]
fn asymmetric_negative_control() {
    // an ellipse shifted along q: reversible but not centrally symmetric
    let s = Surface::Ellipsoid { form: brake_index::linalg::Mat::identity(2, 2), center: Vector::from_vec(vec![0.0, 0.3]) };
    let ham = GaugeHamiltonian::reversible_only(s, 2.0, 1.0, 1).unwrap();
    let o = shoot_from_direction(&ham, &[1.0], &ShootOptions::default()).unwrap();
    assert_eq!(classify_symmetry(&o, 1e-6).class, Symmetry::Asymmetric);
    assert_eq!(classify_symmetry(&o.negated(), 1e-6).class, Symmetry::Asymmetric);
}

#[test]
fn spatial_ellipsoid_has_three_symmetric_classes() {
    let a = [1.0, SQRT_2, 3f64.sqrt()];
    let ham = GaugeHamiltonian::weighted_quadratic(&a, 1.0).unwrap();
    let e = enumerate_brake_orbits(&ham, &EnumerateOptions::default()).unwrap();
    assert_eq!(e.classes.len(), 3, "{:?}", e.classes.iter().map(|c| (c.orbit.period, c.shots)).collect::<Vec<_>>());
    for (c, tau) in e.classes.iter().zip(libration_periods(&a)) {
        assert!((c.orbit.period - tau).abs() < 1e-8);
        assert_eq!(c.symmetry.class, Symmetry::Symmetric);
    }
}
