use brake_index::corpus::*;
use brake_index::index::{index_lagrangian, index_omega, one, splitting_numbers_auto, unit};
use brake_index::linalg::{blocks, diamond_raw, from_blocks, max_abs, n_matrix, Mat};
use brake_index::orbits::{GaugeHamiltonian, Vector};
use brake_index::path::SymplecticPath;
use brake_index::signature::{inertia, m_epsilon, normal_form_l0l1};
use brake_index::suites::{run_suite, Suite, SuiteConfig};
use brake_index::symplectic::json::{matrix_from_json, matrix_to_json};
use brake_index::symplectic::{elliptic_height, n_transform, n_transform_closed, nu_lagrangian, nu_omega, symplectic_defect, Lagrangian, SymplecticMatrix};
use brake_index::Tolerances;
use proptest::prelude::*;

fn rel_defect(m: &Mat) -> f64 {
    symplectic_defect(m) / (1.0 + max_abs(m)).powi(2)
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn generated_matrices_are_symplectic(seed in any::<u64>(), k in 1usize..=4) {
        let m = random_symplectic(&mut rng_from(seed), k);
        prop_assert!(rel_defect(m.matrix()) < 1e-12);
        prop_assert!(m.matrix().determinant() > 0.0);
    }

    #[test]
    fn diamond_and_inverse_stay_symplectic(seed in any::<u64>(), k1 in 1usize..=3, k2 in 1usize..=3) {
        let mut rng = rng_from(seed);
        let a = random_symplectic(&mut rng, k1);
        let b = random_symplectic(&mut rng, k2);
        let d = diamond_raw(a.matrix(), b.matrix());
        prop_assert!(rel_defect(&d) < 1e-12);
        let id = a.mul(&a.inverse());
        prop_assert!(max_abs(&(id.matrix() - Mat::identity(2 * k1, 2 * k1))) < 1e-8 * (1.0 + max_abs(a.matrix())).powi(2));
    }

    #[test]
    fn n_transform_matches_its_closed_form(seed in any::<u64>(), k in 1usize..=4) {
        let m = random_symplectic(&mut rng_from(seed), k);
        let nm = n_matrix(k);
        let direct = &nm * m.inverse().matrix() * &nm * m.matrix();
        let t = n_transform(&m).unwrap();
        let scale = (1.0 + max_abs(m.matrix())).powi(4);
        prop_assert!(max_abs(&(t.matrix() - &direct)) < 1e-9 * scale);
        prop_assert!(max_abs(&(n_transform_closed(m.matrix()) - &direct)) < 1e-9 * scale);
    }

    #[test]
    fn inertia_counts_the_dimension_and_is_congruence_invariant(seed in any::<u64>(), k in 1usize..=6) {
        let mut rng = rng_from(seed);
        let s = random_symmetric(&mut rng, k);
        let q = random_invertible(&mut rng, k, 20.0);
        let t = inertia(&s, 1e-8);
        prop_assume!(t.is_ok());
        let t = t.unwrap();
        prop_assert_eq!(t.dim(), k);
        let c = q.transpose() * &s * &q;
        if let Ok(u) = inertia(&((&c + c.transpose()) * 0.5), 1e-8) {
            prop_assert_eq!(u, t);
        }
    }

    #[test]
    fn m_epsilon_is_symmetric_with_the_block_form_at_zero(seed in any::<u64>(), k in 1usize..=4, eps in -0.5f64..0.5) {
        let p = random_symplectic(&mut rng_from(seed), k);
        let s = m_epsilon(&p, eps).matrix;
        let scale = 1.0 + max_abs(&s);
        prop_assert!(max_abs(&(&s - s.transpose())) <= 1e-12 * scale);
        // P = [[A, B], [C, D]] gives M_0 = −2 [[AᵀC, CᵀB], [BᵀC, BᵀD]]
        let (a, b, c, d) = blocks(p.matrix());
        let oracle = from_blocks(&(a.transpose() * &c), &(c.transpose() * &b), &(b.transpose() * &c), &(b.transpose() * &d)) * -2.0;
        let m0 = m_epsilon(&p, 0.0).matrix;
        prop_assert!(max_abs(&(&m0 - &oracle)) < 1e-9 * (1.0 + max_abs(&oracle)));
    }

    #[test]
    fn elliptic_height_is_even(seed in any::<u64>(), k in 1usize..=4) {
        let m = random_symplectic(&mut rng_from(seed), k);
        let h = elliptic_height(&m, &Tolerances::default());
        prop_assert_eq!(h.value % 2, 0);
        prop_assert!(h.value <= 2 * k);
    }

    #[test]
    fn nullities_are_bounded(seed in any::<u64>(), k in 1usize..=4, theta in 0.0f64..std::f64::consts::TAU) {
        let m = random_symplectic(&mut rng_from(seed), k);
        prop_assert!(nu_omega(&m, unit(theta), 1e-8) <= 2 * k);
        prop_assert!(nu_lagrangian(&m, Lagrangian::L0, 1e-8) <= k);
        prop_assert!(nu_lagrangian(&m, Lagrangian::L1, 1e-8) <= k);
    }

    #[test]
    fn matrix_json_round_trips(seed in any::<u64>(), k in 1usize..=4) {
        let m = random_symplectic(&mut rng_from(seed), k);
        let back = matrix_from_json(&matrix_to_json(m.matrix())).unwrap();
        prop_assert_eq!(&back, m.matrix());
    }
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn splitting_numbers_are_bounded_by_the_nullity(seed in any::<u64>()) {
        let tol = Tolerances::default();
        let factors = random_diamond_product(&mut rng_from(seed), 3);
        let mats: Vec<Mat> = factors.iter().map(|f| f.matrix().unwrap().into_matrix()).collect();
        let m = SymplecticMatrix::new(brake_index::linalg::diamond_all(&mats)).unwrap();
        let mut angles = vec![0.0];
        angles.extend(factors.iter().flat_map(|f| f.unit_angles()));
        for a in angles {
            let w = unit(a);
            let s = splitting_numbers_auto(&m, w, &tol).unwrap();
            let nu = nu_omega(&m, w, tol.kernel);
            prop_assert!(s.s_plus <= nu && s.s_minus <= nu, "angle {}: {:?} with ν = {}", a, s, nu);
        }
    }

    #[test]
    fn constant_generator_paths_start_at_identity_and_stay_symplectic(seed in any::<u64>(), k in 1usize..=3, tau in 0.2f64..4.0) {
        let mut rng = rng_from(seed);
        let s = random_symmetric(&mut rng, 2 * k);
        let g = SymplecticPath::constant_generator(&s, tau, 64).unwrap();
        prop_assert!(g.starts_at_identity(1e-15));
        prop_assert!(g.samples().iter().all(|x| rel_defect(x) < 1e-9));
    }

    #[test]
    fn index_pairs_respect_nullity_bounds(seed in any::<u64>(), n in 1usize..=3) {
        let tol = Tolerances::default();
        let spec = ConvexPathSpec::sample(&mut rng_from(seed), n, false, 0, 1e-3).unwrap();
        let g = spec.path().unwrap();
        if let Ok(r) = index_omega(&g, one(), &tol) {
            prop_assert!(r.pair.nu <= 2 * n);
        }
        for l in [Lagrangian::L0, Lagrangian::L1] {
            if let Ok(r) = index_lagrangian(&g, l, &tol) {
                prop_assert!(r.pair.nu <= n);
                prop_assert!(r.pair.i >= 0, "positive definite generators give nonnegative indices");
            }
        }
    }

    #[test]
    fn normal_form_reassembles_the_input(seed in any::<u64>(), k in 2usize..=4, pick in 0usize..3) {
        let kinds = [DegenerateKind::ZeroB, DegenerateKind::InvertibleA3, DegenerateKind::ZeroA3];
        let inst = degenerate_matrix(&mut rng_from(seed), k, kinds[pick]).unwrap();
        let r = normal_form_l0l1(&inst.matrix, &Tolerances::default());
        prop_assume!(r.is_ok());
        let r = r.unwrap();
        prop_assert!(r.reassembly_error <= 1e-9);
        prop_assert_eq!(r.rank_b, inst.rank_b);
        for p in [&r.p1, &r.p2] {
            let (q, b, c, d) = blocks(p);
            prop_assert!(max_abs(&b) == 0.0 && max_abs(&c) == 0.0);
            prop_assert!(q.determinant() > 0.0);
            prop_assert!(max_abs(&(d.transpose() * &q - Mat::identity(q.nrows(), q.nrows()))) < 1e-9 * (1.0 + max_abs(&q) * max_abs(&d)));
        }
    }

    #[test]
    fn hamiltonians_are_even_reversible_and_convex(a in prop::collection::vec(0.5f64..3.0, 1..=3), x in prop::collection::vec(-2.0f64..2.0, 6)) {
        let n = a.len();
        let ham = GaugeHamiltonian::weighted_quadratic(&a, 1.0).unwrap();
        let x = Vector::from_iterator(2 * n, x.into_iter().take(2 * n));
        prop_assume!(x.norm() > 1e-3);
        let h = ham.value(&x);
        prop_assert!((ham.value(&-&x) - h).abs() <= 1e-10 * (1.0 + h));
        let nx = n_matrix(n) * &x;
        prop_assert!((ham.value(&nx) - h).abs() <= 1e-10 * (1.0 + h));
        let y = ham.scale_to_energy(&x).unwrap();
        prop_assert!((ham.value(&y) - 1.0).abs() < 1e-9);
        let hess = ham.hessian(&y).unwrap();
        prop_assert!(hess.symmetric_eigenvalues().iter().all(|&e| e > 0.0));
    }
}

proptest! {
    #![proptest_config(cases(8))]

    #[test]
    fn identical_suite_configs_give_identical_reports(seed in any::<u64>()) {
        let cfg = SuiteConfig::new(Suite::HeightBound, 6, seed);
        let a = serde_json::to_string(&run_suite(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_suite(&cfg).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }
}
