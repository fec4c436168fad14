use std::f64::consts::PI;

use jjarray::code::build_code;
use jjarray::gates::{
    cnot_schedule, effective_hamiltonian, exp_i_symmetric, operator_distance, single_qubit_rotation, unitarity_error, HamiltonianKind,
};
use jjarray::hamiltonian::{dense_matrix, SectorOperator, SpinHamiltonian};
use jjarray::lattice::{build_punctured_patch, Axial, HoleSpec};
use jjarray::pauli::PauliOp;
use jjarray::spectra::{predicted_splitting, PerturbationKind};
use proptest::prelude::*;

fn pauli(n: usize) -> impl Strategy<Value = PauliOp> {
    (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n), 0u8..4).prop_map(move |(x, z, ph)| {
        let xs: Vec<usize> = (0..n).filter(|&i| x[i]).collect();
        let zs: Vec<usize> = (0..n).filter(|&i| z[i]).collect();
        PauliOp::from_supports(n, &xs, &zs, ph).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn pauli_product_is_associative(a in pauli(70), b in pauli(70), c in pauli(70)) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn commutation_matches_product_order(a in pauli(9), b in pauli(9)) {
        let ab = a.multiply(&b).unwrap();
        let ba = b.multiply(&a).unwrap();
        prop_assert_eq!(a.commutes(&b).unwrap(), ab == ba);
        prop_assert_eq!(a.commutes(&b).unwrap(), b.commutes(&a).unwrap());
    }

    #[test]
    fn inverse_gives_identity(a in pauli(33)) {
        prop_assert!(a.multiply(&a.inverse()).unwrap().is_exact_identity());
    }

    #[test]
    fn text_round_trip(a in pauli(12)) {
        prop_assert_eq!(PauliOp::parse(&a.to_string(), 12).unwrap(), a);
    }

    #[test]
    fn axial_distance_is_a_metric(q1 in -9i32..9, r1 in -9i32..9, q2 in -9i32..9, r2 in -9i32..9, q3 in -9i32..9, r3 in -9i32..9) {
        let (a, b, c) = (Axial::new(q1, r1), Axial::new(q2, r2), Axial::new(q3, r3));
        prop_assert_eq!(a.distance(b), b.distance(a));
        prop_assert!(a.distance(c) <= a.distance(b) + b.distance(c));
        prop_assert_eq!(a.distance(b) == 0, a == b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_hole_patches_encode_one_qubit(radius in 3u32..6, q in -2i32..3, r in -2i32..3) {
        let c = Axial::new(q, r);
        prop_assume!(c.distance(Axial::new(0, 0)) + 1 < radius);
        let lat = build_punctured_patch(radius, &[HoleSpec::single(q, r)]).unwrap();
        lat.check().unwrap();
        let code = build_code(&lat).unwrap();
        prop_assert_eq!(code.k(), 1);
        prop_assert_eq!(code.n() - code.rank(), 1);
        for s in code.constraints().iter().chain(code.flips()) {
            prop_assert!(s.commutes(&code.logical_z()[0]).unwrap());
            prop_assert!(s.commutes(&code.logical_x()[0]).unwrap());
        }
        prop_assert!(!code.logical_z()[0].commutes(&code.logical_x()[0]).unwrap());
    }

    #[test]
    fn two_hole_patches_encode_two_qubits(q in 1i32..3) {
        let lat = build_punctured_patch(5, &[HoleSpec::single(-q, 0), HoleSpec::single(q, 0)]).unwrap();
        let code = build_code(&lat).unwrap();
        prop_assert_eq!(code.k(), 2);
        for i in 0..2 {
            for j in 0..2 {
                let anti = !code.logical_z()[i].commutes(&code.logical_x()[j]).unwrap();
                prop_assert_eq!(anti, i == j);
            }
        }
        let sep = lat.separation_report();
        prop_assert_eq!(sep.hole_hole.len(), 1);
        // loops around holes two sites apart share a vertex
        prop_assert_eq!(sep.hole_hole[0].2 == 0, q == 1);
    }

    #[test]
    fn matrix_free_apply_matches_dense(seed in any::<u64>(), n in 2usize..9) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut h = SpinHamiltonian::new(n);
        for _ in 0..n + 2 {
            let mut x: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            // commute with the enforced Z0 Z1
            if x.contains(&0) != x.contains(&1) {
                if x.contains(&1) { x.retain(|&v| v != 1) } else { x.push(1) }
            }
            let mut z: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            if z.iter().filter(|q| x.contains(q)).count() % 2 == 1 {
                let q = *z.iter().find(|q| x.contains(q)).unwrap();
                z.retain(|&v| v != q);
            }
            h.add_term(rng.gen_range(-2.0..2.0), PauliOp::from_supports(n, &x, &z, 0).unwrap()).unwrap();
        }
        let enforced = PauliOp::from_supports(n, &[], &[0, 1], 0).unwrap();
        let h = h.with_enforced(vec![enforced]).unwrap();
        let sector = h.sector(1 << n).unwrap();
        let dense = dense_matrix(&h, &sector).unwrap();
        let op = SectorOperator::from_hamiltonian(&h, &sector).unwrap();
        let v: Vec<f64> = (0..sector.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let got = op.apply(&v).unwrap();
        let want = &dense * nalgebra::DVector::from_vec(v);
        for (a, b) in got.iter().zip(want.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((&dense - dense.transpose()).amax() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolutions_are_unitary(g1 in -2.0f64..2.0, g2 in -2.0f64..2.0, t in 0.0f64..50.0) {
        let h = effective_hamiltonian(HamiltonianKind::Zx, 2, &[0, 1], &[g1, g2], false).unwrap();
        prop_assert!(unitarity_error(&h.evolve(t)) < 1e-12);
    }

    #[test]
    fn zx_evolution_factorizes(g1 in -2.0f64..2.0, g2 in -2.0f64..2.0, t in 0.0f64..10.0) {
        let h = effective_hamiltonian(HamiltonianKind::Zx, 2, &[0, 1], &[g1, g2], false).unwrap();
        prop_assert!(h.is_commuting());
        let factors = h.terms.iter().fold(
            jjarray::gates::CMatrix::identity(4, 4),
            |u, term| exp_i_symmetric(&(term.word.matrix() * term.coeff), -t) * u,
        );
        prop_assert!(operator_distance(&factors, &h.evolve(t)).unwrap() < 1e-12);
    }

    #[test]
    fn z_rotations_compose(a in -PI..PI, b in -PI..PI, de in 0.01f64..1.0) {
        let ua = single_qubit_rotation(a, 0.0, 0.0, 0, 1, 0.1, de).unwrap().unitary();
        let ub = single_qubit_rotation(b, 0.0, 0.0, 0, 1, 0.1, de).unwrap().unitary();
        let uab = single_qubit_rotation(a + b, 0.0, 0.0, 0, 1, 0.1, de).unwrap().unitary();
        prop_assert!(operator_distance(&(ua * ub), &uab).unwrap() < 1e-12);
    }

    #[test]
    fn cnot_unitary_is_scale_invariant(g1 in 0.1f64..2.0, g2 in 0.1f64..2.0, g3 in 0.1f64..2.0, c in 0.1f64..10.0) {
        let a = cnot_schedule(g1, g2, g3).unwrap();
        let mut scaled = cnot_schedule(c * g1, c * g2, c * g3).unwrap().solver;
        for (s, base) in scaled.steps.iter_mut().zip(&a.solver.steps) {
            s.duration = base.duration / c;
        }
        prop_assert!(operator_distance(&scaled.unitary(), &a.solver.unitary()).unwrap() < 1e-10);
    }

    #[test]
    fn splitting_sign_alternates(amp in 1e-3f64..0.1, gap in 0.1f64..5.0, n in 1usize..9) {
        for kind in [PerturbationKind::Charge, PerturbationKind::Vortex] {
            let v = predicted_splitting(kind, amp, gap, n).unwrap();
            prop_assert_eq!(v > 0.0, n % 2 == 1);
        }
    }
}
