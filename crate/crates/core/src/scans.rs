//! Parameter scans behind the figure data and the worked-example report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{
    example2_closed_forms, example2_delta, example2_p2sq_minus_p3, fbc_psi_boundary, overlap_ratio,
    sn_bound_from_ratio, Criteria, OverlapRatio, STRICT_EPS,
};
use crate::error::{Error, Result};
use crate::multipartite::{apply_lambda_map, ghz_lambda_value, lambda_map_verdict, multipartite_ipc};
use crate::qmat::hs_inner;
use crate::randomized::{estimate_overlaps, run_protocol, MeasurementRecord, OverlapEstimate, ProtocolConfig};
use crate::states::{
    example2, example3_components, example3_state, example3_verifier, ghz_noisy, ghz_pure, isotropic, StateSpec,
};

/// Absolute tolerance in `x` for boundary bisection.
pub const BISECTION_TOL: f64 = 1e-8;
const PRESCAN_POINTS: usize = 41;
const DENSE_POINTS: usize = 4001;

/// Renders rows as CSV preceded by a `#` comment line.
pub fn to_csv(comment: &str, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = format!("# {comment}\n{}\n", header.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Smallest point of `[lo, hi]` where `pred` holds, given `!pred(lo)` and
/// `pred(hi)`, to within `tol`.
pub fn bisect(mut lo: f64, mut hi: f64, tol: f64, pred: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Maximizes `f` on `[lo, hi]`: a coarse pre-scan checks for a single
/// interior peak, then golden-section search refines it. With several
/// local maxima the refinement starts from the best point of a dense grid.
pub fn maximize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let coarse = linspace(lo, hi, PRESCAN_POINTS);
    let vals: Vec<f64> = coarse.iter().map(|&x| f(x)).collect();
    let peaks = (0..vals.len())
        .filter(|&i| {
            let left = i == 0 || vals[i] > vals[i - 1];
            let right = i + 1 == vals.len() || vals[i] >= vals[i + 1];
            left && right
        })
        .count();
    let (grid, gv) = if peaks > 1 {
        let dense = linspace(lo, hi, DENSE_POINTS);
        let dv = dense.iter().map(|&x| f(x)).collect();
        (dense, dv)
    } else {
        (coarse, vals)
    };
    let best = (0..gv.len()).max_by(|&a, &b| gv[a].total_cmp(&gv[b])).expect("nonempty grid");
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (x, fx) = golden_max(&f, a, b, tol);
    if fx >= gv[best] {
        (x, fx)
    } else {
        (grid[best], gv[best])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub x: f64,
    pub y: f64,
    pub s: f64,
    /// Largest `r` whose inequality is violated, 0 if none.
    pub max_r_detected: u32,
}

/// `S(rho_Iso(x), rho_Iso(y))` over a square grid of `[1/d^2, 1]`.
pub fn fig1(d: usize, grid: usize) -> Result<Vec<Fig1Row>> {
    if grid < 2 {
        return Err(Error::OutOfRange(format!("grid {grid} < 2")));
    }
    let xs = linspace(1.0 / (d * d) as f64, 1.0, grid);
    let states = xs.iter().map(|&x| isotropic(d, x)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..grid).flat_map(|i| (0..grid).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let s = overlap_ratio(&states[i], &states[j])?.s;
            Ok(Fig1Row {
                x: xs[i],
                y: xs[j],
                s,
                max_r_detected: sn_bound_from_ratio(s, STRICT_EPS) - 1,
            })
        })
        .collect()
}

/// `S(rho(x), |Theta(y)><Theta(y)|)` in closed form for the Example-2
/// family; both local ratios coincide.
pub fn example2_theta_ratio(d: usize, x: f64, y: f64) -> f64 {
    let df = d as f64;
    let c2 = (1.0 - (df - 1.0) * y * y).max(0.0);
    let c = c2.sqrt();
    let global = (1.0 - x) * (df - 1.0) * y * y / (df - 1.0).powi(2) + x / df * ((df - 1.0) * y + c).powi(2);
    let local = (df - 1.0) * y * y * ((1.0 - x) / (df - 1.0) + x / df) + c2 * x / df;
    OverlapRatio::from_overlaps(global, local, local).s
}

/// `max_y S(rho(x), Theta(y))` and its maximizer.
pub fn example2_best_verifier(d: usize, x: f64) -> (f64, f64) {
    let y_max = 1.0 / ((d - 1) as f64).sqrt();
    maximize_1d(|y| example2_theta_ratio(d, x, y), 0.0, y_max, 1e-12)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3aRow {
    pub d: usize,
    pub r: usize,
    /// Smallest `x` whose optimized ratio exceeds `r`; NaN if none.
    pub x_lower: f64,
    pub y_at_lower: f64,
    /// `x` solving `Delta = r/d`.
    pub x_upper: f64,
}

fn delta_root(d: usize, r: usize) -> f64 {
    let target = r as f64 / d as f64;
    if example2_delta(d, 1.0) <= target {
        return 1.0;
    }
    bisect(0.0, 1.0, BISECTION_TOL, |x| example2_delta(d, x) > target)
}

pub fn fig3a(d_min: usize, d_max: usize, r_max: usize) -> Result<Vec<Fig3aRow>> {
    if d_min < 3 || d_max < d_min || r_max < 1 {
        return Err(Error::OutOfRange(format!(
            "need 3 <= d_min <= d_max and r_max >= 1, got d in [{d_min}, {d_max}], r_max = {r_max}"
        )));
    }
    let jobs: Vec<(usize, usize)> = (d_min..=d_max)
        .flat_map(|d| (1..=r_max.min(d - 1)).map(move |r| (d, r)))
        .collect();
    let mut rows: Vec<Fig3aRow> = jobs
        .par_iter()
        .map(|&(d, r)| {
            let rf = r as f64;
            let detects = |x: f64| example2_best_verifier(d, x).1 > rf + STRICT_EPS;
            let x_lower = if !detects(1.0) {
                f64::NAN
            } else if detects(0.0) {
                0.0
            } else {
                bisect(0.0, 1.0, BISECTION_TOL, detects)
            };
            let y_at_lower = if x_lower.is_nan() {
                f64::NAN
            } else {
                example2_best_verifier(d, x_lower).0
            };
            Fig3aRow {
                d,
                r,
                x_lower,
                y_at_lower,
                x_upper: delta_root(d, r),
            }
        })
        .collect();
    rows.sort_by_key(|r| (r.d, r.r));
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3bRow {
    pub d: usize,
    pub ipc: f64,
    pub p3_ppt: f64,
    pub fbc: f64,
    pub purity: f64,
}

/// Point above which `f` stays positive on `(0, 1]`, located by a scan for
/// the last sign change followed by bisection. Returns 1 if `f(1) <= 0`.
fn last_positive_crossing(f: impl Fn(f64) -> f64) -> f64 {
    let grid = linspace(0.0, 1.0, 10_001);
    if f(1.0) <= 0.0 {
        return 1.0;
    }
    let mut lo = 0.0;
    for w in grid.windows(2).rev() {
        if f(w[0]) <= 0.0 {
            lo = w[0];
            break;
        }
    }
    let hi = grid[grid.iter().position(|&g| g > lo).unwrap_or(grid.len() - 1)];
    bisect(lo, hi, 1e-14, |x| f(x) > 0.0)
}

/// `x` above which `p2^2 - p3 > 0` for the Example-2 family.
pub fn p3_boundary(d: usize) -> f64 {
    last_positive_crossing(|x| example2_p2sq_minus_p3(d, x))
}

/// `x` above which the global purity exceeds the local one.
pub fn purity_boundary(d: usize) -> f64 {
    last_positive_crossing(|x| {
        let cf = example2_closed_forms(d, x).expect("valid parameters");
        cf.purity_global - cf.purity_local
    })
}

pub fn fig3b(d_min: usize, d_max: usize) -> Result<Vec<Fig3bRow>> {
    if d_min < 3 || d_max < d_min {
        return Err(Error::OutOfRange(format!("need 3 <= d_min <= d_max, got [{d_min}, {d_max}]")));
    }
    let mut rows: Vec<Fig3bRow> = (d_min..=d_max)
        .into_par_iter()
        .map(|d| Fig3bRow {
            d,
            ipc: 0.0,
            p3_ppt: p3_boundary(d),
            fbc: fbc_psi_boundary(d, 1),
            purity: purity_boundary(d),
        })
        .collect();
    rows.sort_by_key(|r| r.d);
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfbcRow {
    pub d: usize,
    pub r: usize,
    /// `x` with `x + (1-x)/(d(d-1)) = r/d`.
    pub x_witness: f64,
    /// `x` with `Delta = r/d`.
    pub x_spectrum: f64,
}

pub fn rfbc_tightness(d_min: usize, d_max: usize, r_max: usize) -> Result<Vec<RfbcRow>> {
    if d_min < 3 || d_max < d_min || r_max < 1 {
        return Err(Error::OutOfRange(format!(
            "need 3 <= d_min <= d_max and r_max >= 1, got d in [{d_min}, {d_max}], r_max = {r_max}"
        )));
    }
    Ok((d_min..=d_max)
        .flat_map(|d| (1..=r_max.min(d - 1)).map(move |r| (d, r)))
        .map(|(d, r)| RfbcRow {
            d,
            r,
            x_witness: fbc_psi_boundary(d, r),
            x_spectrum: delta_root(d, r),
        })
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RmConfig {
    pub rho: StateSpec,
    pub sigma: StateSpec,
    pub protocol: ProtocolConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RmReport {
    pub protocol: ProtocolConfig,
    pub estimate: OverlapEstimate,
    /// Noiseless ratio from the density matrices.
    pub exact: OverlapRatio,
    /// Bound from the point estimate of the ratio.
    pub sn_bound: u32,
    /// Bound from the ratio minus two standard errors.
    pub sn_bound_two_se: u32,
}

/// Builds both states, simulates the protocol, and estimates the ratio.
pub fn rm_experiment(cfg: &RmConfig) -> Result<(RmReport, Vec<MeasurementRecord>)> {
    let mut rho = cfg.rho.build()?.density();
    let mut sigma = cfg.sigma.build()?.density();
    let p = &cfg.protocol;
    p.validate()?;
    let grouped = vec![p.dim_a(), p.dim_b()];
    if rho.dim() != p.dim_a() * p.dim_b() || sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of side {} and {} do not fit {} + {} qudits of dimension {}",
            rho.dim(),
            sigma.dim(),
            p.m,
            p.n,
            p.local_dim
        )));
    }
    if rho.dims() != grouped.as_slice() {
        rho = crate::QState::new(grouped.clone(), rho.into_matrix())?;
    }
    if sigma.dims() != grouped.as_slice() {
        sigma = crate::QState::new(grouped, sigma.into_matrix())?;
    }
    let records = run_protocol(&rho, &sigma, p)?;
    let estimate = estimate_overlaps(&records, p)?;
    let exact = overlap_ratio(&rho, &sigma)?;
    let two_se = match (estimate.s_hat, estimate.s_hat_se) {
        (Some(s), Some(se)) => sn_bound_from_ratio(s - 2.0 * se, STRICT_EPS),
        _ => 1,
    };
    Ok((
        RmReport {
            protocol: p.clone(),
            sn_bound: estimate.sn_bound(),
            sn_bound_two_se: two_se,
            estimate,
            exact,
        },
        records,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub block: String,
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Reported for comparison only; never fails the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Note {
    pub block: String,
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub agrees: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExamplesReport {
    pub checks: Vec<Check>,
    pub notes: Vec<Note>,
    pub passed: bool,
}

impl ExamplesReport {
    fn check(&mut self, block: &str, name: String, expected: f64, actual: f64, tol: f64) {
        let pass = (expected - actual).abs() <= tol;
        self.checks.push(Check {
            block: block.into(),
            name,
            expected,
            actual,
            tol,
            pass,
        });
    }

    fn flag(&mut self, block: &str, name: String, ok: bool) {
        self.check(block, name, 1.0, if ok { 1.0 } else { 0.0 }, 0.0);
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Ratio of Example 3 along the verifier family and its maximizer.
pub fn example3_scan() -> Result<(f64, f64)> {
    let rho = example3_state();
    let f = |t: f64| {
        example3_verifier(t)
            .and_then(|v| overlap_ratio(&rho, &v.to_state()))
            .map(|o| o.s)
            .unwrap_or(f64::NEG_INFINITY)
    };
    Ok(maximize_1d(f, -1.0 / 3.0, 1.0 / 6.0, 1e-10))
}

/// Detection threshold in `p` of the bipartition scan on noisy GHZ.
pub fn ghz_scan_threshold(n: usize) -> Result<f64> {
    let sigma = ghz_pure(n, 2)?.to_state();
    let detects = |p: f64| {
        ghz_noisy(n, 2, p)
            .and_then(|rho| multipartite_ipc(&rho, &sigma))
            .map(|v| v.detected)
            .unwrap_or(false)
    };
    Ok(bisect(0.0, 1.0, 1e-9, detects))
}

/// Largest integer `r` with a negative closed-form GHZ Λ value.
pub fn ghz_lambda_r_op(d: usize, p: f64) -> Option<usize> {
    let mut best = None;
    for r in 1..=4 * d {
        if ghz_lambda_value(d, p, r as f64) < -STRICT_EPS {
            best = Some(r);
        }
    }
    best
}

pub fn examples_report() -> Result<ExamplesReport> {
    let mut rep = ExamplesReport::default();

    for d in 2..=10 {
        let sigma = isotropic(d, 1.0)?;
        for x in linspace(1.0 / (d * d) as f64, 1.0, 5) {
            let s = overlap_ratio(&isotropic(d, x)?, &sigma)?.s;
            rep.check("example1", format!("S at d={d}, x={x:.4}"), d as f64 * x, s, 1e-9);
        }
    }

    for d in [3, 5, 8] {
        for x in [0.1, 0.5, 0.9] {
            let rho = example2(d, x)?;
            let cf = example2_closed_forms(d, x)?;
            rep.check("example2", format!("max eigenvalue d={d} x={x}"), cf.delta, rho.max_eigenvalue(), 1e-10);
            rep.check("example2", format!("purity d={d} x={x}"), cf.purity_global, rho.purity(), 1e-12);
        }
        rep.check(
            "example2",
            format!("1-FBC boundary d={d}"),
            (d as f64 - 2.0) / ((d * d - d - 1) as f64),
            fbc_psi_boundary(d, 1),
            1e-15,
        );
    }

    let (t_best, s_best) = example3_scan()?;
    rep.check("example3", "maximal ratio".into(), 2.4, s_best, 1e-8);
    rep.check("example3", "maximizing parameter".into(), 7.0 / 54.0, t_best, 1e-6);
    let rho4 = example3_state();
    let crit = Criteria::default();
    rep.flag("example3", "2-FBC cannot detect (spectrum bound)".into(), crit.fbc_spectrum_bound(&rho4, 2)?);
    let lower = crit.ipc_bound(&rho4, &example3_verifier(7.0 / 54.0)?.to_state())?.sn_bound;
    let upper = crate::criteria::decomposition_sn_upper_bound(&example3_components())?;
    rep.check("example3", "certified lower bound".into(), 3.0, lower as f64, 0.0);
    rep.check("example3", "decomposition upper bound".into(), 3.0, upper as f64, 0.0);

    for n in 3..=5 {
        let expected = 1.0 / (2f64.powi(n as i32 - 1) + 1.0);
        rep.check("example4", format!("threshold n={n}"), expected, ghz_scan_threshold(n)?, 1e-6);
        let p = 0.5;
        let v = multipartite_ipc(&ghz_noisy(n, 2, p)?, &ghz_pure(n, 2)?.to_state())?;
        rep.check(
            "example4",
            format!("global overlap n={n} p={p}"),
            (1.0 - p) / 2f64.powi(n as i32) + p,
            v.global,
            1e-12,
        );
    }

    for d in 2..=4 {
        let sigma = ghz_pure(3, d)?.to_state();
        let dims = [d, d, d];
        for p in [0.5, 0.8, 0.95, 1.0] {
            let rho = ghz_noisy(3, d, p)?;
            for r in 1..=3 {
                let v = lambda_map_verdict(&rho, &sigma, r)?;
                let explicit = hs_inner(&apply_lambda_map(rho.matrix(), &dims, r)?, sigma.matrix())?;
                rep.check("example5", format!("map value d={d} p={p} r={r}"), explicit, v.value, 1e-9);
                rep.check(
                    "example5",
                    format!("GHZ closed form d={d} p={p} r={r}"),
                    ghz_lambda_value(d, p, r as f64),
                    v.value,
                    1e-9,
                );
            }
            let v = lambda_map_verdict(&rho, &sigma, 1)?;
            let r_op = v.r_op.map_or(0.0, |r| r as f64);
            let closed = ghz_lambda_r_op(d, p).map_or(0.0, |r| r as f64);
            rep.check("example5", format!("r_op d={d} p={p}"), closed, r_op, 0.0);
            // (d+1)/((1-p)/p d + 2), which coincides with the exact sign
            // change only at p = 1
            let reference = (d as f64 + 1.0) / ((1.0 - p) / p * d as f64 + 2.0);
            let reference_r_op = (reference - STRICT_EPS).ceil() - 1.0;
            rep.notes.push(Note {
                block: "example5".into(),
                name: format!("r_op from reference boundary d={d} p={p}"),
                value: r_op,
                reference: reference_r_op.max(0.0),
                agrees: r_op == reference_r_op.max(0.0),
            });
        }
    }

    rep.passed = rep.checks.iter().all(|c| c.pass);
    Ok(rep)
}
