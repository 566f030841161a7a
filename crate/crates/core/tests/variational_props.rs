use ipc_core::criteria::overlap_ratio;
use ipc_core::randomized::haar_unitary;
use ipc_core::states::{isotropic, max_entangled, random_pure_with, random_separable, random_truncated_pure, verifier_state};
use ipc_core::variational::{
    fully_entangled_fraction, rotate_state, s_hat, unitary_from_params, OptConfig, UnitaryParams,
};
use ipc_core::qmat::CMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(da: usize, db: usize, rng: &mut ChaCha8Rng) -> UnitaryParams {
    UnitaryParams {
        theta: (0..da * da).map(|_| rng.random_range(-3.0..3.0)).collect(),
        xi: (0..db * db).map(|_| rng.random_range(-3.0..3.0)).collect(),
    }
}

#[test]
fn optimizer_undoes_a_local_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = OptConfig::default();
    for (d, r) in [(2, 2), (3, 2), (3, 3)] {
        let psi = random_truncated_pure(&[d, d], r, &mut rng).unwrap();
        let sigma = verifier_state(&psi).unwrap().to_state();
        let rho = psi.to_state();
        let target = overlap_ratio(&rho, &sigma).unwrap().s;
        let scrambled = rotate_state(&rho, &random_params(d, d, &mut rng)).unwrap();
        assert!(overlap_ratio(&scrambled, &sigma).unwrap().s < target);
        let res = s_hat(&scrambled, &sigma, &cfg).unwrap();
        assert!(res.value >= target - 1e-5, "d={d}: {} < {target}", res.value);
        assert_eq!(res.sn_bound as usize, r);
    }
}

#[test]
fn optimum_is_invariant_under_local_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = OptConfig::default();
    let rho = isotropic(3, 0.6).unwrap();
    let sigma = random_pure_with(&[3, 3], &mut rng).unwrap().to_state();
    let a = s_hat(&rho, &sigma, &cfg).unwrap().value;
    let rotated = rotate_state(&rho, &random_params(3, 3, &mut rng)).unwrap();
    let b = s_hat(&rotated, &sigma, &cfg).unwrap().value;
    assert!((a - b).abs() < 1e-5 * a.max(1.0), "{a} vs {b}");
}

#[test]
fn separable_states_stay_at_or_below_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cfg = OptConfig::default();
    let rho = random_separable(&[2, 2], 6, &mut rng).unwrap();
    let sigma = max_entangled(2).unwrap().to_state();
    let res = s_hat(&rho, &sigma, &cfg).unwrap();
    assert!(res.value <= 1.0 + 1e-9);
    assert_eq!(res.sn_bound, 1);
}

#[test]
fn fef_of_isotropic_beats_random_search() {
    let cfg = OptConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in [2usize, 3] {
        let psi = max_entangled(d).unwrap();
        for x in [1.0 / (d * d) as f64, 0.5, 0.9] {
            let rho = isotropic(d, x).unwrap();
            let f = fully_entangled_fraction(&rho, &cfg).unwrap().value;
            assert!((f - x).abs() < 1e-7, "d={d} x={x}: {f}");
            let mut best = 0.0f64;
            for _ in 0..10_000 {
                let u = haar_unitary(d, &mut rng);
                let v = CMat::identity(d, d).kronecker(&u) * psi.vec();
                let val = (v.adjoint() * rho.matrix() * &v)[(0, 0)].re;
                best = best.max(val);
            }
            assert!(f >= best - 1e-9);
        }
    }
}

#[test]
fn trajectory_is_monotone_and_parameters_reproduce_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let cfg = OptConfig { restarts: 3, ..OptConfig::default() };
    let rho = isotropic(2, 0.8).unwrap();
    let rho = rotate_state(&rho, &random_params(2, 2, &mut rng)).unwrap();
    let sigma = max_entangled(2).unwrap().to_state();
    let res = s_hat(&rho, &sigma, &cfg).unwrap();
    assert!(res.trajectory.windows(2).all(|w| w[1] >= w[0]));
    let u = unitary_from_params(2, &res.params.theta).unwrap();
    let v = unitary_from_params(2, &res.params.xi).unwrap();
    assert!((&u * u.adjoint() - CMat::identity(2, 2)).norm() < 1e-12);
    assert!((&v * v.adjoint() - CMat::identity(2, 2)).norm() < 1e-12);
    let recomputed = overlap_ratio(&rotate_state(&rho, &res.params).unwrap(), &sigma).unwrap().s;
    assert!((recomputed - res.value).abs() < 1e-9);
    assert_eq!(res, s_hat(&rho, &sigma, &cfg).unwrap());
}
