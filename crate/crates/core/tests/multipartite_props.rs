use ipc_core::multipartite::{
    apply_lambda_map, enumerate_bipartitions, ghz_lambda_boundary, ghz_lambda_value, lambda_map_value,
    lambda_map_verdict, multipartite_ipc, reorder, LambdaOverlaps,
};
use ipc_core::qmat::{eig_hermitian, hs_inner};
use ipc_core::states::{
    ghz_noisy, ghz_pure, random_bounded_schmidt_mixture, random_mixed_with, random_pure_with, random_separable,
};
use ipc_core::QState;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn min_eig(s: &QState, r: usize) -> f64 {
    let m = apply_lambda_map(s.matrix(), s.dims(), r).unwrap();
    eig_hermitian(&m).unwrap().values[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fully_separable_states_are_never_flagged(seed in any::<u64>(), n in 3usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = vec![2; n];
        let rho = random_separable(&dims, 8, &mut rng).unwrap();
        let sigma = random_pure_with(&dims, &mut rng).unwrap().to_state();
        prop_assert!(!multipartite_ipc(&rho, &sigma).unwrap().detected);
        prop_assert!(!multipartite_ipc(&sigma, &rho).unwrap().detected);
    }

    #[test]
    fn lambda_is_positive_on_a_bc_products(seed in any::<u64>(), d in 2usize..=3, r in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_mixed_with(&[d], d, &mut rng).unwrap();
        let bc = random_mixed_with(&[d, d], 2, &mut rng).unwrap();
        prop_assert!(min_eig(&a.tensor(&bc), r) >= -1e-9);
    }

    #[test]
    fn lambda_is_positive_on_ab_c_products(seed in any::<u64>(), d in 2usize..=3, r in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ab = random_pure_with(&[d, d], &mut rng).unwrap().to_state();
        let c = random_mixed_with(&[d], d, &mut rng).unwrap();
        prop_assert!(min_eig(&ab.tensor(&c), r) >= -1e-9);
    }

    #[test]
    fn lambda_is_positive_on_b_ac_products_with_bounded_ac_schmidt_number(seed in any::<u64>(), d in 2usize..=3, r in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_mixed_with(&[d], d, &mut rng).unwrap();
        let ac = random_bounded_schmidt_mixture(&[d, d], r, 3, &mut rng).unwrap();
        // layout [B, A, C] moved to [A, B, C]
        let s = reorder(&b.tensor(&ac), &[1, 0, 2]).unwrap();
        prop_assert!(min_eig(&s, r) >= -1e-9);
        let sigma = random_pure_with(&[d, d, d], &mut rng).unwrap().to_state();
        prop_assert!(!lambda_map_verdict(&s, &sigma, r).unwrap().detected);
    }

    #[test]
    fn closed_form_matches_explicit_map(seed in any::<u64>(), r in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [2, 3, 2];
        let rho = random_mixed_with(&dims, 3, &mut rng).unwrap();
        let sigma = random_mixed_with(&dims, 2, &mut rng).unwrap();
        let explicit = hs_inner(&apply_lambda_map(rho.matrix(), &dims, r).unwrap(), sigma.matrix()).unwrap();
        prop_assert!((lambda_map_value(&rho, &sigma, r).unwrap() - explicit).abs() < 1e-10);
    }
}

#[test]
fn ac_entanglement_above_r_can_be_detected() {
    let d = 3;
    let sigma = ghz_pure(3, d).unwrap().to_state();
    let rho = ghz_noisy(3, d, 1.0).unwrap();
    let v = lambda_map_verdict(&rho, &sigma, 1).unwrap();
    assert!(v.detected);
    assert!(v.conclusion.is_some());
    assert_eq!(v.r_op, Some(1));
}

#[test]
fn ghz_closed_form_matches_general_overlaps() {
    for d in 2..=4 {
        let sigma = ghz_pure(3, d).unwrap().to_state();
        for p in [0.0, 0.3, 0.7, 1.0] {
            let ov = LambdaOverlaps::new(&ghz_noisy(3, d, p).unwrap(), &sigma).unwrap();
            for r in [0.5, 1.0, 1.7, 3.0] {
                assert!((ov.value(r) - ghz_lambda_value(d, p, r)).abs() < 1e-12);
            }
            if p > 0.0 {
                let b = ghz_lambda_boundary(d, p);
                assert!(ov.value(b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn bipartition_counts_for_scan_sizes() {
    for n in 3..=10 {
        assert_eq!(enumerate_bipartitions(n).unwrap().len(), (1 << (n - 1)) - 1);
    }
    assert!(enumerate_bipartitions(13).is_err());
}

#[test]
fn wrong_arity_is_rejected() {
    let bip = random_mixed_with(&[2, 2], 2, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert!(multipartite_ipc(&bip, &bip).is_err());
    assert!(LambdaOverlaps::new(&bip, &bip).is_err());
    assert!(lambda_map_value(&bip, &bip, 0).is_err());
}
