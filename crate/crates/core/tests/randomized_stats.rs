use ipc_core::criteria::overlap_ratio;
use ipc_core::qmat::CMat;
use ipc_core::C64;
use ipc_core::randomized::{
    clifford_group, estimate_overlaps, haar_unitary, read_records, run_protocol, swap_test_overlap, write_records,
    Design, ProtocolConfig, Shots,
};
use ipc_core::states::{isotropic, random_mixed, random_pure};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn fourth_moment(u: &CMat) -> f64 {
    u[(0, 0)].norm_sqr().powi(2)
}

#[test]
fn haar_first_and_second_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in [2usize, 3] {
        let n = 20_000;
        let x = CMat::from_fn(d, d, |i, j| c((i + 2 * j) as f64));
        let mut first = CMat::zeros(d, d);
        let mut fourth = 0.0;
        for _ in 0..n {
            let u = haar_unitary(d, &mut rng);
            first += &u * &x * u.adjoint();
            fourth += fourth_moment(&u);
        }
        first /= c(n as f64);
        let expected = CMat::identity(d, d) * (x.trace() / c(d as f64));
        assert!((first - expected).norm() < 0.1);
        let target = 2.0 / (d * (d + 1)) as f64;
        assert!((fourth / n as f64 - target).abs() < 0.01);
    }
}

#[test]
fn clifford_group_is_a_unitary_two_design() {
    let group = clifford_group();
    assert_eq!(group.len(), 24);
    let mean: f64 = group.iter().map(fourth_moment).sum::<f64>() / 24.0;
    assert!((mean - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn standard_error_shrinks_with_settings() {
    let rho = isotropic(4, 0.7).unwrap();
    let sigma = isotropic(4, 1.0).unwrap();
    let se = |n: usize| {
        let cfg = ProtocolConfig::new(2, 2, 2, n, Shots::Exact, 21);
        estimate_overlaps(&run_protocol(&rho, &sigma, &cfg).unwrap(), &cfg).unwrap().global.se
    };
    let ratio = se(4000) / se(1000);
    assert!((0.35..0.65).contains(&ratio), "ratio {ratio}");
}

#[test]
fn clifford_design_estimates_the_ratio() {
    let rho = isotropic(4, 0.8).unwrap();
    let sigma = isotropic(4, 1.0).unwrap();
    let mut cfg = ProtocolConfig::new(2, 2, 2, 2000, Shots::Exact, 3);
    cfg.design = Design::Clifford;
    let est = estimate_overlaps(&run_protocol(&rho, &sigma, &cfg).unwrap(), &cfg).unwrap();
    let s = est.s_hat.unwrap();
    assert!((s - 3.2).abs() < 5.0 * est.s_hat_se.unwrap());
}

#[test]
fn protocol_is_deterministic_per_seed() {
    let rho = random_mixed(&[2, 2], 2, 5).unwrap();
    let sigma = random_pure(&[2, 2], 6).unwrap().to_state();
    let cfg = ProtocolConfig::new(2, 1, 1, 50, Shots::Finite(100), 77);
    let a = run_protocol(&rho, &sigma, &cfg).unwrap();
    let b = run_protocol(&rho, &sigma, &cfg).unwrap();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.seed = 78;
    assert_ne!(a, run_protocol(&rho, &sigma, &other).unwrap());
}

#[test]
fn records_survive_json_lines() {
    let rho = random_mixed(&[2, 2], 3, 8).unwrap();
    let cfg = ProtocolConfig::new(2, 1, 1, 10, Shots::Finite(64), 9);
    let records = run_protocol(&rho, &rho, &cfg).unwrap();
    let mut buf = Vec::new();
    write_records(&mut buf, &records, 2).unwrap();
    let back = read_records(buf.as_slice()).unwrap();
    assert_eq!(records.len(), back.len());
    let e1 = estimate_overlaps(&records, &cfg).unwrap();
    let e2 = estimate_overlaps(&back, &cfg).unwrap();
    assert_eq!(e1, e2);
}

#[test]
fn single_shot_settings_are_rejected() {
    let rho = random_mixed(&[2, 2], 2, 1).unwrap();
    let cfg = ProtocolConfig::new(2, 1, 1, 10, Shots::Finite(1), 0);
    assert!(run_protocol(&rho, &rho, &cfg).and_then(|r| estimate_overlaps(&r, &cfg)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn swap_test_agrees_with_exact_overlap(seed in any::<u64>()) {
        let rho = random_mixed(&[2, 2], 2, seed).unwrap();
        let sigma = random_pure(&[2, 2], seed ^ 1).unwrap().to_state();
        let est = swap_test_overlap(&rho, &sigma, 20_000, seed).unwrap();
        let exact = rho.overlap(&sigma).unwrap();
        prop_assert!((est.value - exact).abs() <= 5.0 * est.se.max(1e-3));
    }

    #[test]
    fn exact_mode_estimates_track_exact_overlaps(seed in any::<u64>()) {
        let rho = random_mixed(&[2, 2], 2, seed).unwrap();
        let sigma = random_mixed(&[2, 2], 1, seed ^ 7).unwrap();
        let cfg = ProtocolConfig::new(2, 1, 1, 400, Shots::Exact, seed);
        let est = estimate_overlaps(&run_protocol(&rho, &sigma, &cfg).unwrap(), &cfg).unwrap();
        let exact = overlap_ratio(&rho, &sigma).unwrap();
        prop_assert!((est.global.value - exact.global).abs() <= 5.0 * est.global.se + 1e-9);
        prop_assert!((est.local_a.value - exact.local_a).abs() <= 5.0 * est.local_a.se + 1e-9);
        prop_assert!((est.local_b.value - exact.local_b).abs() <= 5.0 * est.local_b.se + 1e-9);
    }
}
