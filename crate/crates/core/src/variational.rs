//! Local-unitary optimization of the overlap ratio and the fully entangled
//! fraction.
//!
//! Unitaries are parameterized as `D(phi) G_1 ... G_K` with `D` a diagonal
//! phase layer and `G_k` complex Givens rotations over every pair of basis
//! states, giving `d^2` real parameters and the identity at zero. Maxima are
//! sought by multi-start BFGS with central finite-difference gradients; all
//! reported values are lower bounds on the supremum.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{sn_bound_from_ratio, OverlapRatio, STRICT_EPS};
use crate::error::{Error, Result};
use crate::qmat::{hs_inner, CMat, PureVec, QState, C64};
use crate::states::max_entangled;

/// Real parameters for `U(theta)` on A and `V(xi)` on B.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryParams {
    pub theta: Vec<f64>,
    pub xi: Vec<f64>,
}

impl UnitaryParams {
    pub fn identity(da: usize, db: usize) -> Self {
        Self {
            theta: vec![0.0; da * da],
            xi: vec![0.0; db * db],
        }
    }
}

/// `D(phi) prod_{i<j} G_ij(t, s)` with `p = [phi_0..phi_{d-1}, t_01, s_01, ...]`.
pub fn unitary_from_params(d: usize, p: &[f64]) -> Result<CMat> {
    if p.len() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "{} parameters for a {d}x{d} unitary, expected {}",
            p.len(),
            d * d
        )));
    }
    let mut u = CMat::zeros(d, d);
    for i in 0..d {
        u[(i, i)] = C64::from_polar(1.0, p[i]);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let (cs, sn) = (p[k].cos(), p[k].sin());
            let e = C64::from_polar(1.0, p[k + 1]);
            k += 2;
            for row in 0..d {
                let (a, b) = (u[(row, i)], u[(row, j)]);
                u[(row, i)] = a * cs + b * e * sn;
                u[(row, j)] = -a * e.conj() * sn + b * cs;
            }
        }
    }
    Ok(u)
}

fn default_restarts() -> usize {
    8
}
fn default_max_iters() -> usize {
    500
}
fn default_tol() -> f64 {
    1e-9
}
fn default_fd_step() -> f64 {
    1e-5
}
fn default_window() -> usize {
    50
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Stop once the value improves by less than this over `window`
    /// iterations.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_window")]
    pub window: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            restarts: default_restarts(),
            max_iters: default_max_iters(),
            tol: default_tol(),
            fd_step: default_fd_step(),
            seed: 0,
            window: default_window(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    pub params: UnitaryParams,
    /// Best-so-far value per iteration of the winning restart.
    pub trajectory: Vec<f64>,
    pub restarts: usize,
    pub converged: bool,
    /// `max(1, ceil(value - eps))`, valid for both states.
    pub sn_bound: u32,
}

struct Run {
    value: f64,
    x: Vec<f64>,
    trajectory: Vec<f64>,
    converged: bool,
}

/// Central-difference gradient.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = xp[i];
            xp[i] = orig + h;
            let fp = f(&xp);
            xp[i] = orig - h;
            let fm = f(&xp);
            xp[i] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// BFGS ascent with Armijo backtracking.
fn maximize(f: &dyn Fn(&[f64]) -> f64, x0: Vec<f64>, cfg: &OptConfig) -> Run {
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let mut fx = f(x.as_slice());
    let mut g = DVector::from_vec(fd_gradient(f, x.as_slice(), cfg.fd_step));
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut trajectory = vec![fx];
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        if g.norm() < 1e-12 {
            converged = true;
            break;
        }
        let mut step = None;
        for attempt in 0..2 {
            let mut dir = &h * &g;
            let mut slope = g.dot(&dir);
            if slope <= 0.0 || attempt == 1 {
                h = DMatrix::identity(n, n);
                dir = g.clone();
                slope = g.dot(&dir);
            }
            let mut t = (1.0 / dir.norm()).min(1.0);
            while t > 1e-14 {
                let cand = &x + &dir * t;
                let fc = f(cand.as_slice());
                if fc >= fx + 1e-4 * t * slope {
                    step = Some((cand, fc));
                    break;
                }
                t *= 0.5;
            }
            if step.is_some() {
                break;
            }
        }
        let Some((xn, fnew)) = step else {
            converged = true;
            break;
        };
        let gn = DVector::from_vec(fd_gradient(f, xn.as_slice(), cfg.fd_step));
        // BFGS on -f: y is the change in its gradient
        let s = &xn - &x;
        let y = &g - &gn;
        let sy = s.dot(&y);
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(n, n);
            let a = &i - &s * y.transpose() * rho;
            let b = &i - &y * s.transpose() * rho;
            h = &a * &h * &b + &s * s.transpose() * rho;
        }
        x = xn;
        fx = fnew;
        g = gn;
        trajectory.push(fx);
        let len = trajectory.len();
        if len > cfg.window && trajectory[len - 1] - trajectory[len - 1 - cfg.window] < cfg.tol {
            converged = true;
            break;
        }
    }
    Run {
        value: fx,
        x: x.as_slice().to_vec(),
        trajectory,
        converged,
    }
}

fn multistart(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    n: usize,
    cfg: &OptConfig,
    stream_offset: u64,
) -> Run {
    let restarts = cfg.restarts.max(1);
    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let x0 = if k == 0 {
                vec![0.0; n]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(stream_offset + k as u64);
                (0..n)
                    .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                    .collect()
            };
            maximize(f, x0, cfg)
        })
        .collect();
    runs.into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one restart")
}

fn bipartite(rho: &QState) -> Result<(usize, usize)> {
    match rho.dims() {
        [a, b] => Ok((*a, *b)),
        other => Err(Error::NotBipartite(other.len())),
    }
}

/// Which local unitaries are free.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Free {
    Both,
    BOnly,
}

fn ratio_objective(
    rho: &QState,
    sigma: &QState,
    free: Free,
    use_a: bool,
) -> Result<impl Fn(&[f64]) -> f64 + Sync> {
    let (da, db) = bipartite(rho)?;
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "state layouts {:?} and {:?} differ",
            rho.dims(),
            sigma.dims()
        )));
    }
    let rho_m = rho.matrix().clone();
    let sigma_m = sigma.matrix().clone();
    let rho_x = rho.reduced(&[if use_a { 0 } else { 1 }])?.into_matrix();
    let sigma_x = sigma.reduced(&[if use_a { 0 } else { 1 }])?.into_matrix();
    let na = if free == Free::Both { da * da } else { 0 };
    Ok(move |p: &[f64]| {
        let u = if na > 0 {
            unitary_from_params(da, &p[..na]).expect("sized")
        } else {
            CMat::identity(da, da)
        };
        let v = unitary_from_params(db, &p[na..]).expect("sized");
        let w = u.kronecker(&v);
        let rotated = &w * &rho_m * w.adjoint();
        let global = hs_inner(&rotated, &sigma_m).unwrap_or(f64::NAN);
        let ux = if use_a { &u } else { &v };
        let local = hs_inner(&(ux * &rho_x * ux.adjoint()), &sigma_x).unwrap_or(f64::NAN);
        let o = if use_a {
            OverlapRatio::from_overlaps(global, local, 0.0)
        } else {
            OverlapRatio::from_overlaps(global, 0.0, local)
        };
        o.s
    })
}

fn optimize_ratio(rho: &QState, sigma: &QState, cfg: &OptConfig, free: Free) -> Result<OptResult> {
    let (da, db) = bipartite(rho)?;
    let n = match free {
        Free::Both => da * da + db * db,
        Free::BOnly => db * db,
    };
    let fa = ratio_objective(rho, sigma, free, true)?;
    let fb = ratio_objective(rho, sigma, free, false)?;
    let ra = multistart(&fa, n, cfg, 0);
    let rb = multistart(&fb, n, cfg, 1 << 32);
    let best = if rb.value > ra.value { rb } else { ra };
    let params = match free {
        Free::Both => UnitaryParams {
            theta: best.x[..da * da].to_vec(),
            xi: best.x[da * da..].to_vec(),
        },
        Free::BOnly => UnitaryParams {
            theta: vec![0.0; da * da],
            xi: best.x.clone(),
        },
    };
    let mut traj = best.trajectory;
    for i in 1..traj.len() {
        traj[i] = traj[i].max(traj[i - 1]);
    }
    Ok(OptResult {
        value: best.value,
        params,
        trajectory: traj,
        restarts: cfg.restarts.max(1),
        converged: best.converged,
        sn_bound: sn_bound_from_ratio(best.value, STRICT_EPS),
    })
}

/// Lower bound on `sup_{U,V} S((U⊗V) rho (U⊗V)^dagger, sigma)`.
pub fn s_hat(rho: &QState, sigma: &QState, cfg: &OptConfig) -> Result<OptResult> {
    optimize_ratio(rho, sigma, cfg, Free::Both)
}

/// As [`s_hat`] with `U = I` held fixed.
pub fn s_hat_v_only(rho: &QState, sigma: &QState, cfg: &OptConfig) -> Result<OptResult> {
    optimize_ratio(rho, sigma, cfg, Free::BOnly)
}

/// Applies the optimized local unitaries to `rho`.
pub fn rotate_state(rho: &QState, params: &UnitaryParams) -> Result<QState> {
    let (da, db) = bipartite(rho)?;
    let w = unitary_from_params(da, &params.theta)?.kronecker(&unitary_from_params(db, &params.xi)?);
    rho.conjugate_by(&w)
}

/// Lower bound on `max_U <Psi|(I⊗U^dagger) rho (I⊗U)|Psi>`.
pub fn fully_entangled_fraction(rho: &QState, cfg: &OptConfig) -> Result<OptResult> {
    let (da, db) = bipartite(rho)?;
    if da != db {
        return Err(Error::DimensionMismatch(format!(
            "fully entangled fraction needs equal local dimensions, got {da} and {db}"
        )));
    }
    let d = da;
    let psi: PureVec = max_entangled(d)?;
    let psi_v = psi.vec().clone();
    let rho_m = rho.matrix().clone();
    let f = move |p: &[f64]| {
        let u = unitary_from_params(d, p).expect("sized");
        let w = CMat::identity(d, d).kronecker(&u);
        let phi = w * &psi_v;
        (phi.adjoint() * &rho_m * &phi)[(0, 0)].re
    };
    let run = multistart(&f, d * d, cfg, 2 << 32);
    let mut traj = run.trajectory;
    for i in 1..traj.len() {
        traj[i] = traj[i].max(traj[i - 1]);
    }
    Ok(OptResult {
        value: run.value,
        params: UnitaryParams {
            theta: vec![0.0; d * d],
            xi: run.x,
        },
        trajectory: traj,
        restarts: cfg.restarts.max(1),
        converged: run.converged,
        sn_bound: sn_bound_from_ratio(d as f64 * run.value, STRICT_EPS),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FefIdentityReport {
    pub d: usize,
    /// Ratio optimized over `V` only against `|Psi><Psi|`.
    pub s_hat: f64,
    pub fef: f64,
    pub d_times_fef: f64,
    pub relative_deviation: f64,
}

/// Computes `S_hat(rho, |Psi><Psi|)` and `d F` by separate optimizations.
pub fn verify_shat_fef_identity(rho: &QState, cfg: &OptConfig) -> Result<FefIdentityReport> {
    let (da, db) = bipartite(rho)?;
    if da != db {
        return Err(Error::DimensionMismatch(format!(
            "identity needs equal local dimensions, got {da} and {db}"
        )));
    }
    let psi = max_entangled(da)?.to_state();
    let s = s_hat_v_only(rho, &psi, cfg)?.value;
    let f = fully_entangled_fraction(rho, cfg)?.value;
    let df = da as f64 * f;
    Ok(FefIdentityReport {
        d: da,
        s_hat: s,
        fef: f,
        d_times_fef: df,
        relative_deviation: (s - df).abs() / df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::overlap_ratio;
    use crate::states::{isotropic, random_mixed};
    use approx::assert_abs_diff_eq;

    fn residual(u: &CMat) -> f64 {
        (u.adjoint() * u - CMat::identity(u.nrows(), u.ncols())).norm()
    }

    #[test]
    fn parameterization_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for d in 2..6 {
            assert_abs_diff_eq!((unitary_from_params(d, &vec![0.0; d * d]).unwrap() - CMat::identity(d, d)).norm(), 0.0);
            for _ in 0..50 {
                let p: Vec<f64> = (0..d * d).map(|_| rng.random_range(-10.0..10.0)).collect();
                assert!(residual(&unitary_from_params(d, &p).unwrap()) < 1e-10);
            }
        }
        assert!(unitary_from_params(3, &[0.0; 8]).is_err());
    }

    #[test]
    fn parameterization_reaches_swap() {
        // theta = pi/2 on the only pair maps |0> -> e|1>, |1> -> -conj(e)|0>
        let u = unitary_from_params(2, &[0.0, 0.0, std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        assert_abs_diff_eq!(u[(1, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[(0, 1)].re, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn richardson_consistency_of_gradient() {
        let rho = random_mixed(&[2, 2], 4, 3).unwrap();
        let sigma = random_mixed(&[2, 2], 2, 4).unwrap();
        let f = ratio_objective(&rho, &sigma, Free::Both, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dir: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let deriv = |h: f64| {
                let xp: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + h * b).collect();
                let xm: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a - h * b).collect();
                (f(&xp) - f(&xm)) / (2.0 * h)
            };
            let (d1, d2, d3) = (deriv(4e-2), deriv(2e-2), deriv(1e-2));
            let ratio = (d1 - d2) / (d2 - d3);
            assert!((ratio - 4.0).abs() < 0.5, "error ratio {ratio}");
            let g = fd_gradient(&f, &x, 1e-5);
            let dd: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
            let rich = (4.0 * d3 - d2) / 3.0;
            assert!((dd - rich).abs() <= 1e-5 * rich.abs().max(1.0));
        }
    }

    #[test]
    fn identity_start_recovers_ratio_and_trajectory_is_monotone() {
        let rho = random_mixed(&[2, 2], 3, 8).unwrap();
        let sigma = random_mixed(&[2, 2], 2, 9).unwrap();
        let cfg = OptConfig {
            restarts: 3,
            ..OptConfig::default()
        };
        let res = s_hat(&rho, &sigma, &cfg).unwrap();
        let s = overlap_ratio(&rho, &sigma).unwrap().s;
        assert!(res.value >= s - STRICT_EPS);
        assert!(res.trajectory.windows(2).all(|w| w[1] >= w[0]));
        let rotated = rotate_state(&rho, &res.params).unwrap();
        assert_abs_diff_eq!(overlap_ratio(&rotated, &sigma).unwrap().s, res.value, epsilon = 1e-9);
    }

    #[test]
    fn maximally_entangled_self_pair() {
        let psi = isotropic(3, 1.0).unwrap();
        let res = s_hat(&psi, &psi, &OptConfig { restarts: 1, ..OptConfig::default() }).unwrap();
        assert_abs_diff_eq!(res.value, 3.0, epsilon = 1e-9);
        assert_eq!(res.sn_bound, 3);
    }

    #[test]
    fn fef_examples() {
        let cfg = OptConfig::default();
        assert_abs_diff_eq!(fully_entangled_fraction(&isotropic(2, 1.0).unwrap(), &cfg).unwrap().value, 1.0, epsilon = 1e-9);
        let mm = QState::maximally_mixed(vec![3, 3]).unwrap();
        assert_abs_diff_eq!(fully_entangled_fraction(&mm, &cfg).unwrap().value, 1.0 / 9.0, epsilon = 1e-12);
        assert!(fully_entangled_fraction(&QState::maximally_mixed(vec![2, 3]).unwrap(), &cfg).is_err());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: OptConfig = serde_json::from_str(r#"{"restarts": 4, "seed": 3}"#).unwrap();
        assert_eq!(cfg.restarts, 4);
        assert_eq!(cfg.fd_step, 1e-5);
        assert_eq!(cfg.tol, 1e-9);
        assert_eq!(cfg.window, 50);
    }
}
