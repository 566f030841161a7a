//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails.

use std::process::ExitCode;
use std::time::Instant;

use ipc_core::criteria::{
    example2_closed_forms, example2_delta, overlap_ratio, pt_moments, Criteria, STRICT_EPS,
};
use ipc_core::multipartite::{lambda_map_value, multipartite_ipc, LambdaOverlaps};
use ipc_core::qmat::{CMat, QState};
use ipc_core::C64;
use ipc_core::randomized::{estimate_overlaps, run_protocol, ProtocolConfig, Shots};
use ipc_core::scans::{example3_scan, fig3b, ghz_scan_threshold, linspace};
use ipc_core::states::{
    example2, example3_components, example3_state, example3_verifier, ghz_noisy, ghz_pure, isotropic,
    random_bounded_schmidt_mixture, random_mixed_with, random_pure_with, random_separable,
};
use ipc_core::variational::{verify_shat_fef_identity, OptConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const LAYOUTS: [[usize; 2]; 5] = [[2, 2], [2, 3], [3, 3], [3, 4], [4, 4]];

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn example1_formula() -> Outcome {
    let mut worst = 0.0f64;
    for d in 2..=10 {
        let sigma = isotropic(d, 1.0).map_err(err)?;
        for x in linspace(1.0 / (d * d) as f64, 1.0, 20) {
            let s = overlap_ratio(&isotropic(d, x).map_err(err)?, &sigma).map_err(err)?.s;
            worst = worst.max((s - d as f64 * x).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max |S - d x| = {worst:.2e} (tol 1e-9)")))
}

fn example3() -> Outcome {
    let (t, s) = example3_scan().map_err(err)?;
    let rho = example3_state();
    let crit = Criteria::default();
    let unfaithful = crit.fbc_spectrum_bound(&rho, 2).map_err(err)?;
    let lower = crit
        .ipc_bound(&rho, &example3_verifier(7.0 / 54.0).map_err(err)?.to_state())
        .map_err(err)?
        .sn_bound;
    let upper = ipc_core::criteria::decomposition_sn_upper_bound(&example3_components()).map_err(err)?;
    let ok = (s - 2.4).abs() <= 1e-8 && (t - 7.0 / 54.0).abs() <= 1e-6 && unfaithful && lower == 3 && upper == 3;
    Ok((
        ok,
        format!(
            "max S = {s:.12} at t = {t:.9} (7/54 = {:.9}); spectrum bound r=2: {unfaithful}; SN in [{lower}, {upper}]",
            7.0 / 54.0
        ),
    ))
}

fn delta_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    let mut points = 0;
    for d in 3..=12 {
        for x in linspace(0.0, 1.0, 10) {
            let lam = example2(d, x).map_err(err)?.max_eigenvalue();
            worst = worst.max((lam - example2_delta(d, x)).abs());
            points += 1;
        }
    }
    Ok((worst <= 1e-10, format!("{points} points, max |lambda_max - Delta| = {worst:.2e} (tol 1e-10)")))
}

fn moment_identity() -> Outcome {
    let mut worst = 0.0f64;
    for d in 3..=6 {
        for k in 1..=19 {
            let x = 0.05 * k as f64;
            let p = pt_moments(&example2(d, x).map_err(err)?, 3).map_err(err)?;
            let cf = example2_closed_forms(d, x).map_err(err)?.p2sq_minus_p3;
            worst = worst.max((p[1] * p[1] - p[2] - cf).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max deviation {worst:.2e} (tol 1e-9)")))
}

fn observation_equivalence() -> Outcome {
    let crit = Criteria::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e);
    let (mut disagreements, mut weak, mut detections, mut checks) = (0, 0, 0, 0);
    let mut min_margin = f64::INFINITY;
    for i in 0..1000 {
        let dims = LAYOUTS[i % LAYOUTS.len()];
        let n = dims[0] * dims[1];
        let rank = 1 + (i / LAYOUTS.len()) % n;
        let rho = random_mixed_with(&dims, rank, &mut rng).map_err(err)?;
        for r in 1..=3 {
            checks += 1;
            let detected = crit.reduction_check(&rho, r).map_err(err)?.detected;
            let witness = crit.extract_ipc_witness(&rho, r).map_err(err)?;
            if detected != witness.is_some() {
                disagreements += 1;
            }
            if let Some(sigma) = witness {
                detections += 1;
                let s = overlap_ratio(&rho, &sigma).map_err(err)?.s;
                min_margin = min_margin.min(s - r as f64);
                if s <= r as f64 + STRICT_EPS {
                    weak += 1;
                }
            }
        }
    }
    Ok((
        disagreements == 0 && weak == 0 && detections > 0,
        format!(
            "{checks} checks, {detections} detections, {disagreements} disagreements, {weak} witnesses with s <= r + eps, min s - r = {min_margin:.3e}"
        ),
    ))
}

fn random_sigma(dims: &[usize], rng: &mut ChaCha8Rng) -> Result<QState, String> {
    if rng.random_bool(0.5) {
        Ok(random_pure_with(dims, rng).map_err(err)?.to_state())
    } else {
        let n: usize = dims.iter().product();
        let rank = rng.random_range(1..=n);
        random_mixed_with(dims, rank, rng).map_err(err)
    }
}

fn soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e9);
    let mut worst_sep = f64::NEG_INFINITY;
    let mut viol_sep = 0;
    for i in 0..10_000 {
        let dims = LAYOUTS[i % LAYOUTS.len()];
        let rho = random_separable(&dims, 2 * dims[0] * dims[1], &mut rng).map_err(err)?;
        let sigma = random_sigma(&dims, &mut rng)?;
        let s = overlap_ratio(&rho, &sigma).map_err(err)?.s;
        worst_sep = worst_sep.max(s);
        if s > 1.0 + STRICT_EPS {
            viol_sep += 1;
        }
    }
    let mut worst_sr2 = f64::NEG_INFINITY;
    let mut viol_sr2 = 0;
    for i in 0..1000 {
        let dims = LAYOUTS[2 + i % 3];
        let terms = 1 + i % 8;
        let rho = random_bounded_schmidt_mixture(&dims, 2, terms, &mut rng).map_err(err)?;
        let sigma = random_sigma(&dims, &mut rng)?;
        let s = overlap_ratio(&rho, &sigma).map_err(err)?.s;
        worst_sr2 = worst_sr2.max(s);
        if s > 2.0 + STRICT_EPS {
            viol_sr2 += 1;
        }
    }
    Ok((
        viol_sep == 0 && viol_sr2 == 0,
        format!(
            "separable: 10000 states, max s = {worst_sep:.6}, {viol_sep} violations; Schmidt rank <= 2: 1000 states, max s = {worst_sr2:.6}, {viol_sr2} violations"
        ),
    ))
}

fn containments() -> Outcome {
    let crit = Criteria::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0);
    let (mut fbc_hits, mut fbc_bad, mut pc_hits, mut pc_bad) = (0, 0, 0, 0);
    for i in 0..1000 {
        let dims = LAYOUTS[i % LAYOUTS.len()];
        let n = dims[0] * dims[1];
        let rank = 1 + (i / LAYOUTS.len()) % 4.min(n);
        let rho = random_mixed_with(&dims, rank, &mut rng).map_err(err)?;

        let eig = ipc_core::qmat::eig_hermitian(rho.matrix()).map_err(err)?;
        let top = eig.vectors.column(n - 1).into_owned();
        let mut witnesses = vec![ipc_core::PureVec::normalized(dims.to_vec(), top.clone()).map_err(err)?];
        let noise = random_pure_with(&dims, &mut rng).map_err(err)?;
        witnesses.push(
            ipc_core::PureVec::normalized(dims.to_vec(), &top + noise.vec() * c(0.2)).map_err(err)?,
        );
        for _ in 0..3 {
            witnesses.push(random_pure_with(&dims, &mut rng).map_err(err)?);
        }
        for phi in &witnesses {
            if crit.fbc_witness_value(&rho, phi, 1).map_err(err)?.detected {
                fbc_hits += 1;
                if !crit.ipc_bound(&rho, &phi.to_state()).map_err(err)?.detected {
                    fbc_bad += 1;
                }
            }
        }
        if crit.purity_check(&rho).map_err(err)?.detected {
            pc_hits += 1;
            if !crit.ipc_bound(&rho, &rho).map_err(err)?.detected {
                pc_bad += 1;
            }
        }
    }
    Ok((
        fbc_bad == 0 && pc_bad == 0 && fbc_hits > 0 && pc_hits > 0,
        format!(
            "FBC detections {fbc_hits} ({fbc_bad} missed by IPC); purity detections {pc_hits} ({pc_bad} missed by IPC)"
        ),
    ))
}

fn example4_thresholds() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 3..=5 {
        let expected = 1.0 / (2f64.powi(n as i32 - 1) + 1.0);
        let found = ghz_scan_threshold(n).map_err(err)?;
        let sigma = ghz_pure(n, 2).map_err(err)?.to_state();
        let below = multipartite_ipc(&ghz_noisy(n, 2, expected - 1e-6).map_err(err)?, &sigma).map_err(err)?;
        let above = multipartite_ipc(&ghz_noisy(n, 2, expected + 1e-6).map_err(err)?, &sigma).map_err(err)?;
        let good = (found - expected).abs() <= 1e-6 && !below.detected && above.detected;
        ok &= good;
        parts.push(format!("n={n}: flip at {found:.9} vs {expected:.9}"));
    }
    Ok((ok, parts.join("; ")))
}

/// `Λ(X)` by linearity over matrix units `|ijk><i'j'k'|`.
fn lambda_by_matrix_units(x: &CMat, d: [usize; 3], r: usize) -> CMat {
    let n = d[0] * d[1] * d[2];
    let idx = |i: usize, j: usize, k: usize| (i * d[1] + j) * d[2] + k;
    let inv_r = 1.0 / r as f64;
    let mut out = CMat::zeros(n, n);
    for i in 0..d[0] {
        for j in 0..d[1] {
            for k in 0..d[2] {
                for ip in 0..d[0] {
                    for jp in 0..d[1] {
                        for kp in 0..d[2] {
                            let coef = x[(idx(i, j, k), idx(ip, jp, kp))];
                            if coef.norm() == 0.0 {
                                continue;
                            }
                            // A: |i><i'| -> delta I - |i><i'|/r ; B: |j><j'| -> delta I + |j><j'|
                            let a_terms: Vec<(usize, usize, f64)> = {
                                let mut v = vec![(i, ip, -inv_r)];
                                if i == ip {
                                    v.extend((0..d[0]).map(|a| (a, a, 1.0)));
                                }
                                v
                            };
                            let b_terms: Vec<(usize, usize, f64)> = {
                                let mut v = vec![(j, jp, 1.0)];
                                if j == jp {
                                    v.extend((0..d[1]).map(|b| (b, b, 1.0)));
                                }
                                v
                            };
                            for &(a, ap, wa) in &a_terms {
                                for &(b, bp, wb) in &b_terms {
                                    out[(idx(a, b, k), idx(ap, bp, kp))] += coef * c(wa * wb);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn example5() -> Outcome {
    let mut worst = 0.0f64;
    for d in 2..=4 {
        let sigma = ghz_pure(3, d).map_err(err)?.to_state();
        for p in [0.0, 0.25, 0.5, 0.8, 0.95, 1.0] {
            let rho = ghz_noisy(3, d, p).map_err(err)?;
            for r in 1..=3 {
                let cf = lambda_map_value(&rho, &sigma, r).map_err(err)?;
                let lam = lambda_by_matrix_units(rho.matrix(), [d, d, d], r);
                let explicit = ipc_core::qmat::hs_inner(&lam, sigma.matrix()).map_err(err)?;
                worst = worst.max((cf - explicit).abs());
            }
        }
    }
    let part_a = worst <= 1e-9;

    let mut flips = Vec::new();
    let mut part_b = true;
    for d in 2..=4 {
        let sigma = ghz_pure(3, d).map_err(err)?.to_state();
        for p in [0.5, 0.8, 0.95, 1.0] {
            let ov = LambdaOverlaps::new(&ghz_noisy(3, d, p).map_err(err)?, &sigma).map_err(err)?;
            let stated = (d as f64 + 1.0) / ((1.0 - p) / p * d as f64 + 2.0);
            let flips_here = ov.value(stated - 1e-6) < 0.0 && ov.value(stated + 1e-6) > 0.0;
            part_b &= flips_here;
            if !flips_here {
                let actual = ipc_core::multipartite::ghz_lambda_boundary(d, p);
                flips.push(format!("d={d} p={p}: no flip at {stated:.6}, sign changes at {actual:.6}"));
            }
        }
    }
    let detail = format!(
        "closed form vs matrix-unit map: max deviation {worst:.2e} (tol 1e-9) [{}]; sign flip at (d+1)/((1-p)/p d+2): {} [{}]",
        if part_a { "ok" } else { "FAIL" },
        if part_b { "ok" } else { "FAIL" },
        if flips.is_empty() { "all flip".to_string() } else { flips.join("; ") }
    );
    Ok((part_a && part_b, detail))
}

fn randomized_consistency() -> Outcome {
    let rho = isotropic(4, 0.9).map_err(err)?;
    let sigma = isotropic(4, 1.0).map_err(err)?;
    let mut within = 0;
    let mut reps_done = 0;
    for rep in 0..100u64 {
        let cfg = ProtocolConfig::new(2, 2, 2, 1000, Shots::Exact, 1000 + rep);
        let est = estimate_overlaps(&run_protocol(&rho, &sigma, &cfg).map_err(err)?, &cfg).map_err(err)?;
        reps_done += 1;
        if let (Some(s), Some(se)) = (est.s_hat, est.s_hat_se) {
            if (s - 3.6).abs() <= 4.0 * se {
                within += 1;
            }
        }
    }
    let exact_ok = within >= 95;

    // finite shots: pooled bias of every estimate over repetitions
    let truth = [
        rho.overlap(&sigma).map_err(err)?,
        rho.reduced(&[0]).map_err(err)?.overlap(&sigma.reduced(&[0]).map_err(err)?).map_err(err)?,
        rho.reduced(&[1]).map_err(err)?.overlap(&sigma.reduced(&[1]).map_err(err)?).map_err(err)?,
        rho.purity(),
        sigma.purity(),
    ];
    let reps = 10;
    let mut sums = [0.0; 5];
    let mut var = [0.0; 5];
    for rep in 0..reps {
        let cfg = ProtocolConfig::new(2, 2, 2, 1000, Shots::Finite(1000), 5000 + rep);
        let est = estimate_overlaps(&run_protocol(&rho, &sigma, &cfg).map_err(err)?, &cfg).map_err(err)?;
        let vals = [est.global, est.local_a, est.local_b, est.purities.rho, est.purities.sigma];
        for (k, e) in vals.iter().enumerate() {
            sums[k] += e.value;
            var[k] += e.se * e.se;
        }
    }
    let mut worst_z = 0.0f64;
    for k in 0..5 {
        let mean = sums[k] / reps as f64;
        let se = var[k].sqrt() / reps as f64;
        worst_z = worst_z.max((mean - truth[k]).abs() / se);
    }
    let shots_ok = worst_z <= 4.0;
    Ok((
        exact_ok && shots_ok,
        format!(
            "exact mode: {within}/{reps_done} repetitions within 4 SE of 3.6 (need 95); finite shots: max |bias|/SE = {worst_z:.2} over {reps} pooled repetitions (need <= 4)"
        ),
    ))
}

fn fef_identity() -> Outcome {
    let cfg = OptConfig::default();
    let mut worst = 0.0f64;
    let mut count = 0;
    for d in 2..=3 {
        for x in linspace(1.0 / (d * d) as f64, 1.0, 5) {
            let rep = verify_shat_fef_identity(&isotropic(d, x).map_err(err)?, &cfg).map_err(err)?;
            worst = worst.max(rep.relative_deviation);
            count += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xfef);
    for _ in 0..20 {
        let rank = rng.random_range(1..=4);
        let rho = random_mixed_with(&[2, 2], rank, &mut rng).map_err(err)?;
        let rep = verify_shat_fef_identity(&rho, &cfg).map_err(err)?;
        worst = worst.max(rep.relative_deviation);
        count += 1;
    }
    Ok((worst <= 1e-3, format!("{count} states, max relative deviation {worst:.2e} (tol 1e-3)")))
}

fn fig3b_boundaries() -> Outcome {
    let d = 10;
    let row = fig3b(d, d).map_err(err)?[0];
    let fbc_ok = row.fbc == 8.0 / 89.0;
    let crit = Criteria::default();
    let mut ipc_misses = 0;
    let xs: Vec<f64> = (1..=40).map(|k| k as f64 / 40.0).chain([1e-3, 1e-2]).collect();
    for &x in &xs {
        let rho = example2(d, x).map_err(err)?;
        let detected = match crit.extract_ipc_witness(&rho, 1).map_err(err)? {
            Some(sigma) => crit.ipc_bound(&rho, &sigma).map_err(err)?.detected,
            None => false,
        };
        if !detected {
            ipc_misses += 1;
        }
    }
    let gap = |x: f64| -> Result<(f64, f64), String> {
        let rho = example2(d, x).map_err(err)?;
        let p = pt_moments(&rho, 3).map_err(err)?;
        let pc = rho.purity() - rho.reduced(&[0]).map_err(err)?.purity();
        Ok((p[1] * p[1] - p[2], pc))
    };
    let (p3_lo, _) = gap(row.p3_ppt - 1e-6)?;
    let (p3_hi, _) = gap(row.p3_ppt + 1e-6)?;
    let (_, pc_lo) = gap(row.purity - 1e-6)?;
    let (_, pc_hi) = gap(row.purity + 1e-6)?;
    let p3_ok = p3_lo < 0.0 && p3_hi > 0.0;
    let pc_ok = pc_lo < 0.0 && pc_hi > 0.0;
    Ok((
        fbc_ok && ipc_misses == 0 && p3_ok && pc_ok,
        format!(
            "FBC column {} (8/89 exact: {fbc_ok}); IPC misses {ipc_misses}/{}; p3-PPT root {:.9} sign change {p3_ok}; purity root {:.9} sign change {pc_ok}",
            row.fbc,
            xs.len(),
            row.p3_ppt,
            row.purity
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("isotropic ratio equals d x", example1_formula),
        ("4x4 example: max ratio 12/5, SN 3, 2-FBC blind", example3),
        ("largest eigenvalue closed form", delta_closed_form),
        ("partial-transpose moment polynomial", moment_identity),
        ("reduction test vs extracted IPC witness", observation_equivalence),
        ("soundness on separable and Schmidt-rank-2 states", soundness),
        ("FBC and purity detections imply IPC detection", containments),
        ("noisy GHZ bipartition-scan thresholds", example4_thresholds),
        ("tripartite map: closed form and sign flip", example5),
        ("randomized-measurement estimator consistency", randomized_consistency),
        ("ratio optimum vs fully entangled fraction", fef_identity),
        ("detection boundaries at d = 10", fig3b_boundaries),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {detail} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
