use super::*;
use crate::linalg::diamond_all;
use crate::symplectic::{approx_equivalent, Equivalence, NormalForm};
use nalgebra::DVector;
use std::f64::consts::PI;

fn m2(a: f64, b: f64, c: f64, d: f64) -> SymplecticMatrix {
    SymplecticMatrix::new(Mat::from_row_slice(2, 2, &[a, b, c, d])).unwrap()
}

fn sgn(p: &SymplecticMatrix, sign: f64) -> i64 {
    signature_small_eps(p, sign, &Tolerances::default()).unwrap()
}

#[test]
fn m_epsilon_of_identity_vanishes_at_zero() {
    let m = m_epsilon(&SymplecticMatrix::identity(3), 0.0);
    assert!(max_abs(&m.matrix) < 1e-15);
}

#[test]
fn m_zero_of_a3_core() {
    // A, D symmetric and C = D·A − I give a symplectic [[A, I], [C, D]]
    let a1 = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0]);
    let a2 = Mat::from_row_slice(2, 2, &[0.4, -0.2, -0.2, 0.7]);
    let a3 = &a1 * &a2 - Mat::identity(2, 2);
    let r = SymplecticMatrix::new(from_blocks(&a2, &Mat::identity(2, 2), &a3, &a1)).unwrap();
    let (ra1, _, ra3, ra2) = r.blocks();
    let expect = from_blocks(&(&ra1 * &ra3), &ra3.transpose(), &ra3, &ra2) * -2.0;
    assert!(max_abs(&(m_epsilon(&r, 0.0).matrix - expect)) < 1e-12);
}

#[test]
fn rotation_and_diagonal_rows() {
    for &t in &[PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 5.0 * PI / 6.0, 7.0 * PI / 6.0] {
        let r = m2(t.cos(), -t.sin(), t.sin(), t.cos());
        assert_eq!(sgn(&r, 1.0), 0, "R({t}), ε > 0");
        assert_eq!(sgn(&r, -1.0), 0, "R({t}), ε < 0");
    }
    for &a in &[0.5, -0.5, 2.0, -2.0] {
        let d = m2(a, 0.0, 0.0, 1.0 / a);
        assert_eq!(sgn(&d, 1.0), 0);
        assert_eq!(sgn(&d, -1.0), 0);
    }
}

#[test]
fn shear_rows() {
    for &b in &[0.5, 1.0, 2.0] {
        for &s in &[1.0, -1.0] {
            assert_eq!(sgn(&m2(s, s * b, 0.0, s), 1.0), 0);
            assert_eq!(sgn(&m2(s, 0.0, -s * b, s), 1.0), 0);
            assert_eq!(sgn(&m2(s, -s * b, 0.0, s), 1.0), 2);
            assert_eq!(sgn(&m2(s, 0.0, s * b, s), 1.0), -2);
        }
    }
}

#[test]
fn m_epsilon_diamond_additive() {
    let a = NormalForm::R { theta: 1.1 }.matrix().unwrap();
    let b = NormalForm::N1 { lambda: -1.0, b: 1.0 }.matrix().unwrap();
    assert!(m_epsilon_diamond_gap(&a, &b, 1e-3) < 1e-14);
}

#[test]
fn inertia_examples() {
    let t = inertia(&Mat::zeros(4, 4), 1e-8).unwrap();
    assert_eq!((t.m_plus, t.m_zero, t.m_minus), (0, 4, 0));
    let t = inertia(&Mat::from_diagonal(&DVector::from_vec(vec![3.0, -1.0, 0.0])), 1e-8).unwrap();
    assert_eq!((t.m_plus, t.m_zero, t.m_minus), (1, 1, 1));
    assert!(matches!(inertia(&Mat::from_diagonal(&DVector::from_vec(vec![1.0, 1e-8])), 1e-8), Err(Error::Unstable(_))));
}

#[test]
fn off_diagonal_rank() {
    let e1 = Mat::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
    let e2 = Mat::from_row_slice(3, 3, &[-1.0, 0.0, 0.3, 0.0, 5.0, 0.0, 0.3, 0.0, 1.0]);
    let (t, r, holds) = off_diagonal_rank_bound(&e1, &e2, &Tolerances::default()).unwrap();
    assert_eq!(r, 2);
    assert!(t.m_plus >= 2 && t.m_minus >= 2 && holds);
}

#[test]
fn identity_bounds() {
    let b = signature_bounds(&SymplecticMatrix::identity(2), &Tolerances::default()).unwrap();
    assert!(b.holds);
    assert_eq!((b.bound_neg, b.bound_pos), (0, 0));
}

#[test]
fn rotation_bounds_are_eps_independent() {
    let r = NormalForm::R { theta: 0.9 }.matrix().unwrap().into_matrix();
    let p = SymplecticMatrix::new(diamond_all(&[r.clone(), r])).unwrap();
    let b = signature_bounds(&p, &Tolerances::default()).unwrap();
    assert!(b.holds);
    assert_eq!(b.eps_independent, Some(true));
}

#[test]
fn sign_cancellation_small_cases() {
    let tol = Tolerances::default();
    let i3 = Mat::identity(3, 3);
    let c = sign_cancellation_check(&i3, &(-&i3), 1e-3, &tol).unwrap();
    assert_eq!(c.sum, 0);
    assert!(c.holds);
    for &a in &[2.0, -0.5] {
        let c = sign_cancellation_check(&Mat::from_element(1, 1, a), &Mat::from_element(1, 1, -3.0), 1e-3, &tol).unwrap();
        assert!(c.holds);
    }
    assert!(sign_cancellation_check(&i3, &i3, 1e-3, &tol).is_err());
}

#[test]
fn height_bound_with_zero_a1() {
    // A1 = 0 forces A3 = −I and A2 arbitrary symmetric
    let k = 2;
    let a2 = Mat::from_row_slice(2, 2, &[0.3, 0.1, 0.1, -0.4]);
    let r = SymplecticMatrix::new(from_blocks(&Mat::zeros(k, k), &Mat::identity(k, k), &-Mat::identity(k, k), &a2)).unwrap();
    let h = elliptic_height_bound(&r, 1e-8, &Tolerances::default()).unwrap();
    assert_eq!(h.m, k);
    assert_eq!(h.half_sgn, 0);
    assert!(h.holds);
    assert!(h.charpoly_residual < 1e-9);
}

fn shear(c: &[f64]) -> SymplecticMatrix {
    let k = c.len();
    let i = Mat::identity(k, k);
    let cm = Mat::from_diagonal(&DVector::from_vec(c.to_vec()));
    SymplecticMatrix::new(from_blocks(&i, &Mat::zeros(k, k), &cm, &i)).unwrap()
}

#[test]
fn normal_form_of_pure_shear() {
    let rep = normal_form_l0l1(&shear(&[0.0, 1.0, -2.0, 3.0]), &Tolerances::default()).unwrap();
    assert_eq!(rep.case, NormalFormCase::ZeroB);
    let cls = rep.shear_class.unwrap();
    assert_eq!(cls.verdict, Equivalence::Equivalent);
    let counts: Vec<usize> = cls.factors.iter().map(|f| f.1).collect();
    assert_eq!(counts, vec![1, 1, 2]);
    assert!(rep.reassembly_error < 1e-12);
}

#[test]
fn normal_form_splits_invertible_a3_block() {
    // [[A1, I], [A3, A2]] ⋄ [[1, 0], [c, 1]], conjugated by a block transform
    let a1 = Mat::from_element(1, 1, 2.0);
    let a2 = Mat::from_element(1, 1, 0.3);
    let core = from_blocks(&a2, &Mat::identity(1, 1), &(&a2 * &a1 - Mat::identity(1, 1)), &a1);
    let sh = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.7, 1.0]);
    let inner = diamond_all(&[core, sh]);
    let q = Mat::from_row_slice(2, 2, &[1.0, 0.4, -0.3, 2.0]);
    let p = crate::symplectic::block_transform(&q).unwrap();
    let r = SymplecticMatrix::new(p.matrix() * inner * p.inverse().matrix()).unwrap();
    let rep = normal_form_l0l1(&r, &Tolerances::default()).unwrap();
    assert_eq!(rep.case, NormalFormCase::InvertibleA3);
    assert_eq!(rep.factors.len(), 2);
    assert!(rep.reassembly_error < 1e-9, "{}", rep.reassembly_error);
    assert!(rep.invariants_preserved);
}

#[test]
fn normal_form_zero_a3_identities() {
    // B = diag(1, 0), A3 = 0 after normalization
    let a = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
    let b = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let c = Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.5]);
    let d = Mat::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]);
    let r = SymplecticMatrix::new(from_blocks(&a, &b, &c, &d)).unwrap();
    let rep = normal_form_l0l1(&r, &Tolerances::default()).unwrap();
    assert_eq!(rep.case, NormalFormCase::ZeroA3);
    let z = rep.zero_core.unwrap();
    assert!(z.inertia_identities_hold);
    assert_eq!(z.q_plus + z.q_zero + z.q_minus, 2 - z.r - z.lambda);
    assert_eq!(z.n_transform_class.verdict, Equivalence::Equivalent);
    assert!(rep.reassembly_error < 1e-9);
}

#[test]
fn normal_form_rank_ambiguity_is_indeterminate() {
    let a = Mat::identity(2, 2);
    let b = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-9]);
    let r = SymplecticMatrix::new(from_blocks(&a, &b, &Mat::zeros(2, 2), &a)).unwrap();
    assert!(matches!(normal_form_l0l1(&r, &Tolerances::default()), Err(Error::Indeterminate(_))));
}

#[test]
fn shear_equivalence_to_normal_forms_is_checked() {
    let s = shear(&[0.0, -1.0]);
    let nf = SymplecticMatrix::new(diamond_all(&[
        NormalForm::N1 { lambda: 1.0, b: 0.0 }.matrix().unwrap().into_matrix(),
        NormalForm::N1 { lambda: 1.0, b: 1.0 }.matrix().unwrap().into_matrix(),
    ]))
    .unwrap();
    assert_eq!(approx_equivalent(&s, &nf, &Tolerances::default()), Equivalence::Equivalent);
}
