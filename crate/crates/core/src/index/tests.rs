use std::f64::consts::PI;

use super::*;
use crate::path::SymplecticPath;
use crate::symplectic::{Lagrangian, NormalForm};
use crate::tol::Tolerances;

fn rot(tau: f64) -> SymplecticPath {
    SymplecticPath::rotation(1, tau, 128).unwrap()
}

#[test]
fn rotation_omega_indices() {
    let tol = Tolerances::default();
    let r = index_omega(&rot(PI), one(), &tol).unwrap().pair;
    assert_eq!((r.i, r.nu), (1, 0));
    let r = index_omega(&rot(2.0 * PI), one(), &tol).unwrap().pair;
    assert_eq!((r.i, r.nu), (1, 2));
    let r = index_omega(&rot(PI), unit(PI), &tol).unwrap().pair;
    assert_eq!((r.i, r.nu), (0, 2));
    let r = index_omega(&rot(2.0 * PI), unit(PI), &tol).unwrap().pair;
    assert_eq!((r.i, r.nu), (2, 0));
    let r = index_omega(&rot(3.0 * PI), one(), &tol).unwrap().pair;
    assert_eq!((r.i, r.nu), (3, 0));
}

#[test]
fn rotation_lagrangian_indices() {
    let tol = Tolerances::default();
    for k in 1..=4 {
        let p = rot(k as f64 * PI);
        let l0 = index_lagrangian(&p, Lagrangian::L0, &tol).unwrap().pair;
        assert_eq!((l0.i, l0.nu), (k - 1, 1), "k = {k}");
    }
    let l1 = index_lagrangian(&rot(PI / 2.0), Lagrangian::L1, &tol).unwrap().pair;
    assert_eq!((l1.i, l1.nu), (0, 0));
    let l1 = index_lagrangian(&rot(PI), Lagrangian::L1, &tol).unwrap().pair;
    assert_eq!((l1.i, l1.nu), (0, 1));
    let l1 = index_lagrangian(&rot(1.5 * PI), Lagrangian::L1, &tol).unwrap().pair;
    assert_eq!((l1.i, l1.nu), (1, 0));
}

fn check_table(nf: NormalForm, omega: num_complex::Complex64, want: (usize, usize)) {
    let tol = Tolerances::default();
    let s = splitting_table_checked(&[nf], omega, &tol).unwrap_or_else(|e| panic!("{nf:?} at {omega}: {e}"));
    assert_eq!((s.s_plus, s.s_minus), want, "{nf:?} at {omega}");
}

#[test]
fn splitting_table_of_normal_forms() {
    use crate::symplectic::{n2_block, NormalForm as F};
    for b in [1.0, 0.0] {
        check_table(F::N1 { lambda: 1.0, b }, one(), (1, 1));
        check_table(F::N1 { lambda: -1.0, b: -b }, unit(PI), (1, 1));
    }
    check_table(F::N1 { lambda: 1.0, b: -1.0 }, one(), (0, 0));
    check_table(F::N1 { lambda: -1.0, b: 1.0 }, unit(PI), (0, 0));
    for theta in [PI / 3.0, 2.0, 4.0, 5.5] {
        check_table(F::R { theta }, unit(theta), (0, 1));
        check_table(F::R { theta }, unit(-theta), (1, 0));
    }
    for lambda in [2.0, -2.0] {
        check_table(F::D { lambda }, one(), (0, 0));
        check_table(F::D { lambda }, unit(1.0), (0, 0));
    }
    for theta in [PI / 3.0, 4.0] {
        for skew in [1.0, -1.0] {
            let b = n2_block(theta, skew, 0.3, 0.0);
            check_table(F::N2 { theta, b }, unit(theta), if crate::symplectic::n2_is_trivial(theta, &b).unwrap() { (0, 0) } else { (1, 1) });
        }
    }
}

#[test]
fn splitting_witness_independence() {
    use crate::symplectic::{NormalForm as F, SymplecticMatrix};
    let tol = Tolerances::default();
    let m: SymplecticMatrix = F::N1 { lambda: 1.0, b: 1.0 }.matrix().unwrap();
    let a = splitting_numbers(&m, one(), &polar_witness(&m, 1.0, 256).unwrap(), &tol).unwrap();
    let b = splitting_numbers(&m, one(), &loop_witness(&m, 1.0, 256).unwrap(), &tol).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rotation_sharpness_small_n() {
    let tol = Tolerances::default();
    for n in 1..=3usize {
        let g = SymplecticPath::rotation(n, PI, 128).unwrap();
        let mc = mixed_concavity(&g, &tol).unwrap();
        assert_eq!((mc.mu_01, mc.mu_10), (-(n as i64), -(n as i64)));
        let g2 = crate::path::brake_iterate(&g, 2).unwrap();
        let s = splitting_numbers(&g2.endpoint(), one(), &g2, &tol).unwrap();
        assert_eq!(s.s_plus, n);
        let i = index_omega(&g, one(), &tol).unwrap().pair;
        assert_eq!(i.i, n as i64);
    }
}

#[test]
fn rotation_iteration_checks() {
    let tol = Tolerances::default();
    let g = rot(PI);
    let mi = mean_index_l0(&g, 32, &tol).unwrap();
    assert!((mi.estimate - 31.0 / 32.0).abs() < 1e-12, "{mi:?}");
    let rep = iteration_monotonicity_check(&g, 8, &tol).unwrap();
    assert!(rep.holds, "{rep:?}");
    let tuples = common_index_jump_search(&[rot(PI), rot(PI / 2.0)], 8, &tol).unwrap();
    assert!(tuples.len() >= 3, "{tuples:?}");
    for t in &tuples {
        assert_eq!(t.r, 2 * t.m[0] as i64);
        assert_eq!(t.m[1], 2 * t.m[0]);
    }
}
