//! Bipartite detection criteria for the Schmidt number.
//!
//! Every strict inequality is tested with a margin `eps` (default
//! [`STRICT_EPS`]); a certified bound is `max(1, ceil(s - eps))`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{c, eig_hermitian, schmidt_decompose, Bipartition, CMat, CVec, PureVec, QState};

pub const STRICT_EPS: f64 = 1e-9;
/// Local overlaps at or below this count as zero, making the ratio zero.
pub const ZERO_DENOMINATOR: f64 = 1e-14;

/// Local and global overlaps of a state pair and their ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRatio {
    pub global: f64,
    pub local_a: f64,
    pub local_b: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub s: f64,
}

impl OverlapRatio {
    /// Builds the ratios from the three overlaps.
    pub fn from_overlaps(global: f64, local_a: f64, local_b: f64) -> Self {
        let ratio = |den: f64| if den > ZERO_DENOMINATOR { global / den } else { 0.0 };
        let (s_a, s_b) = (ratio(local_a), ratio(local_b));
        Self {
            global,
            local_a,
            local_b,
            s_a,
            s_b,
            s: s_a.max(s_b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub criterion: String,
    pub values: BTreeMap<String, f64>,
    pub threshold: f64,
    pub detected: bool,
    pub sn_bound: u32,
}

impl CriterionVerdict {
    fn new(criterion: &str, values: &[(&str, f64)], threshold: f64, detected: bool, sn_bound: u32) -> Self {
        Self {
            criterion: criterion.to_string(),
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            threshold,
            detected,
            sn_bound,
        }
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// `max(1, ceil(s - eps))`.
pub fn sn_bound_from_ratio(s: f64, eps: f64) -> u32 {
    let b = (s - eps).ceil();
    if b.is_finite() && b > 1.0 {
        b as u32
    } else {
        1
    }
}

fn bipartite_dims(rho: &QState) -> Result<(usize, usize)> {
    match rho.dims() {
        [a, b] => Ok((*a, *b)),
        other => Err(Error::NotBipartite(other.len())),
    }
}

fn same_layout(rho: &QState, sigma: &QState) -> Result<()> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "state layouts {:?} and {:?} differ",
            rho.dims(),
            sigma.dims()
        )));
    }
    Ok(())
}

pub fn overlap_ratio(rho: &QState, sigma: &QState) -> Result<OverlapRatio> {
    same_layout(rho, sigma)?;
    bipartite_dims(rho)?;
    let global = rho.overlap(sigma)?;
    let local_a = rho.reduced(&[0])?.overlap(&sigma.reduced(&[0])?)?;
    let local_b = rho.reduced(&[1])?.overlap(&sigma.reduced(&[1])?)?;
    Ok(OverlapRatio::from_overlaps(global, local_a, local_b))
}

/// Which reduction operator went negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionSide {
    /// `r I_A ⊗ rho_B - rho`; a negative direction raises `S_B` above `r`.
    IdentityOnA,
    /// `r rho_A ⊗ I_B - rho`; a negative direction raises `S_A` above `r`.
    IdentityOnB,
}

/// Outcome of the r-reduction test together with the extremal eigenvector.
#[derive(Clone, Debug)]
pub struct ReductionDetail {
    pub min_eig_identity_a: f64,
    pub min_eig_identity_b: f64,
    pub side: ReductionSide,
    pub min_eigenvalue: f64,
    pub eigenvector: CVec,
}

/// Criteria evaluated with a configurable strict-inequality margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub eps: f64,
}

impl Default for Criteria {
    fn default() -> Self {
        Self { eps: STRICT_EPS }
    }
}

impl Criteria {
    pub fn ipc_bound(&self, rho: &QState, sigma: &QState) -> Result<CriterionVerdict> {
        let o = overlap_ratio(rho, sigma)?;
        let bound = sn_bound_from_ratio(o.s, self.eps);
        Ok(CriterionVerdict::new(
            "ipc",
            &[
                ("global", o.global),
                ("local_a", o.local_a),
                ("local_b", o.local_b),
                ("s_a", o.s_a),
                ("s_b", o.s_b),
                ("s", o.s),
            ],
            1.0,
            bound >= 2,
            bound,
        ))
    }

    pub fn reduction_detail(&self, rho: &QState, r: usize) -> Result<ReductionDetail> {
        let (da, db) = bipartite_dims(rho)?;
        if r == 0 {
            return Err(Error::OutOfRange("reduction level r must be >= 1".into()));
        }
        let rf = c(r as f64);
        let rho_a = rho.reduced(&[0])?.into_matrix();
        let rho_b = rho.reduced(&[1])?.into_matrix();
        let p1: CMat = CMat::identity(da, da).kronecker(&rho_b) * rf - rho.matrix();
        let p2: CMat = rho_a.kronecker(&CMat::identity(db, db)) * rf - rho.matrix();
        let e1 = eig_hermitian(&p1)?;
        let e2 = eig_hermitian(&p2)?;
        let (l1, l2) = (e1.values[0], e2.values[0]);
        let (side, min_eigenvalue, eigenvector) = if l1 <= l2 {
            (ReductionSide::IdentityOnA, l1, e1.vectors.column(0).into_owned())
        } else {
            (ReductionSide::IdentityOnB, l2, e2.vectors.column(0).into_owned())
        };
        Ok(ReductionDetail {
            min_eig_identity_a: l1,
            min_eig_identity_b: l2,
            side,
            min_eigenvalue,
            eigenvector,
        })
    }

    pub fn reduction_check(&self, rho: &QState, r: usize) -> Result<CriterionVerdict> {
        let det = self.reduction_detail(rho, r)?;
        let detected = det.min_eigenvalue < -self.eps;
        Ok(CriterionVerdict::new(
            "reduction",
            &[
                ("r", r as f64),
                ("min_eig_identity_a", det.min_eig_identity_a),
                ("min_eig_identity_b", det.min_eig_identity_b),
                ("min_eigenvalue", det.min_eigenvalue),
            ],
            0.0,
            detected,
            if detected { r as u32 + 1 } else { 1 },
        ))
    }

    /// The projector onto the most negative eigenvector of the violated
    /// reduction operator, if the r-reduction test detects.
    pub fn extract_ipc_witness(&self, rho: &QState, r: usize) -> Result<Option<QState>> {
        let det = self.reduction_detail(rho, r)?;
        if det.min_eigenvalue >= -self.eps {
            return Ok(None);
        }
        let v = PureVec::normalized(rho.dims().to_vec(), det.eigenvector)?;
        Ok(Some(v.to_state()))
    }

    pub fn purity_check(&self, rho: &QState) -> Result<CriterionVerdict> {
        bipartite_dims(rho)?;
        let p = rho.purity();
        let pa = rho.reduced(&[0])?.purity();
        let pb = rho.reduced(&[1])?.purity();
        let detected = p > pa.min(pb) + self.eps;
        // 2^(S2(rho_X) - S2(rho)) = Tr[rho^2] / Tr[rho_X^2]
        let bound = sn_bound_from_ratio(p / pa, self.eps).max(sn_bound_from_ratio(p / pb, self.eps));
        Ok(CriterionVerdict::new(
            "purity",
            &[("purity", p), ("purity_a", pa), ("purity_b", pb)],
            pa.min(pb),
            detected,
            if detected { bound.max(2) } else { 1 },
        ))
    }

    /// Expectation of `(sum of top-r Schmidt coefficients of phi) I - |phi><phi|`.
    pub fn fbc_witness_value(&self, rho: &QState, phi: &PureVec, r: usize) -> Result<CriterionVerdict> {
        bipartite_dims(rho)?;
        if phi.dims() != rho.dims() {
            return Err(Error::DimensionMismatch(format!(
                "witness layout {:?} vs state layout {:?}",
                phi.dims(),
                rho.dims()
            )));
        }
        let sd = schmidt_decompose(phi, &Bipartition::single(0))?;
        if sd.rank() < r || r == 0 {
            return Err(Error::InvalidWitness { rank: sd.rank(), r });
        }
        let top = sd.top_sum(r);
        let fid = phi.expectation(rho.matrix());
        let value = top - fid;
        let detected = value < -self.eps;
        Ok(CriterionVerdict::new(
            "fbc",
            &[("r", r as f64), ("top_sum", top), ("fidelity", fid), ("value", value)],
            0.0,
            detected,
            if detected { r as u32 + 1 } else { 1 },
        ))
    }

    /// Sufficient condition for no r-FBC witness detecting `rho`:
    /// `lambda_max <= max(r/d_A, r/d_B)`.
    pub fn fbc_spectrum_bound(&self, rho: &QState, r: usize) -> Result<bool> {
        let (da, db) = bipartite_dims(rho)?;
        let limit = (r as f64 / da as f64).max(r as f64 / db as f64);
        Ok(rho.max_eigenvalue() <= limit + self.eps)
    }

    pub fn p3_ppt_check(&self, rho: &QState) -> Result<CriterionVerdict> {
        let p = pt_moments(rho, 3)?;
        let gap = p[1] * p[1] - p[2];
        let detected = gap > self.eps;
        Ok(CriterionVerdict::new(
            "p3_ppt",
            &[("p2", p[1]), ("p3", p[2]), ("p2sq_minus_p3", gap)],
            0.0,
            detected,
            if detected { 2 } else { 1 },
        ))
    }
}

pub fn ipc_bound(rho: &QState, sigma: &QState) -> Result<CriterionVerdict> {
    Criteria::default().ipc_bound(rho, sigma)
}

pub fn reduction_check(rho: &QState, r: usize) -> Result<CriterionVerdict> {
    Criteria::default().reduction_check(rho, r)
}

pub fn extract_ipc_witness(rho: &QState, r: usize) -> Result<Option<QState>> {
    Criteria::default().extract_ipc_witness(rho, r)
}

pub fn purity_check(rho: &QState) -> Result<CriterionVerdict> {
    Criteria::default().purity_check(rho)
}

pub fn fbc_witness_value(rho: &QState, phi: &PureVec, r: usize) -> Result<CriterionVerdict> {
    Criteria::default().fbc_witness_value(rho, phi, r)
}

pub fn fbc_spectrum_bound(rho: &QState, r: usize) -> Result<bool> {
    Criteria::default().fbc_spectrum_bound(rho, r)
}

pub fn p3_ppt_check(rho: &QState) -> Result<CriterionVerdict> {
    Criteria::default().p3_ppt_check(rho)
}

/// `p_k = Tr[(rho^{T_A})^k]` for `k = 1..=k_max`, from the partially
/// transposed spectrum.
pub fn pt_moments(rho: &QState, k_max: usize) -> Result<Vec<f64>> {
    bipartite_dims(rho)?;
    if k_max < 2 {
        return Err(Error::OutOfRange(format!("k_max = {k_max}, need at least 2")));
    }
    let pt = rho.partial_transpose(&Bipartition::single(0))?;
    let spec = eig_hermitian(&pt)?.values;
    Ok((1..=k_max as i32)
        .map(|k| spec.iter().map(|l| l.powi(k)).sum())
        .collect())
}

/// Largest Schmidt rank among the components of a pure-state decomposition,
/// an upper bound on the Schmidt number of the mixture.
pub fn decomposition_sn_upper_bound(components: &[(f64, PureVec)]) -> Result<usize> {
    let mut best = 0;
    for (w, v) in components {
        if *w > 0.0 {
            best = best.max(schmidt_decompose(v, &Bipartition::single(0))?.rank());
        }
    }
    Ok(best)
}

/// Closed forms for the Example-2 family `(1-x) I_{(d-1)^2}/(d-1)^2 + x |Psi><Psi|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example2ClosedForms {
    pub delta: f64,
    pub p2sq_minus_p3: f64,
    pub purity_global: f64,
    pub purity_local: f64,
    /// Detection boundary in `x` of the 1-FBC witness built from `|Psi>`.
    pub fbc_psi_threshold: f64,
    /// `<Psi|rho(x)|Psi>`.
    pub psi_fidelity: f64,
}

pub fn example2_closed_forms(d: usize, x: f64) -> Result<Example2ClosedForms> {
    if d < 3 {
        return Err(Error::OutOfRange(format!("d = {d}, need d >= 3")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!("x = {x} outside [0, 1]")));
    }
    let df = d as f64;
    Ok(Example2ClosedForms {
        delta: example2_delta(d, x),
        p2sq_minus_p3: example2_p2sq_minus_p3(d, x),
        purity_global: (1.0 - x).powi(2) / (df - 1.0).powi(2) + x * x + 2.0 * (1.0 - x) * x / ((df - 1.0) * df),
        purity_local: (1.0 - x).powi(2) / (df - 1.0) + x * x / df + 2.0 * (1.0 - x) * x / df,
        fbc_psi_threshold: fbc_psi_boundary(d, 1),
        psi_fidelity: x + (1.0 - x) / (df * (df - 1.0)),
    })
}

/// Largest eigenvalue of the Example-2 state.
pub fn example2_delta(d: usize, x: f64) -> f64 {
    let df = d as f64;
    let m = (1.0 - x) / (df - 1.0).powi(2);
    let n = x / df;
    let s = m + n * df;
    (s + (s * s - 4.0 * m * n).max(0.0).sqrt()) / 2.0
}

pub fn example2_p2sq_minus_p3(d: usize, x: f64) -> f64 {
    let df = d as f64;
    let (d2, d3, d4) = (df * df, df.powi(3), df.powi(4));
    let a = (d3 - 2.0 * d2 + 2.0).powi(2);
    let b = 2.0 * d4 - 12.0 * d3 + 18.0 * d2 - 5.0 * df - 6.0;
    let cc = -d4 + 8.0 * d3 - 15.0 * d2 + 10.0 * df + 1.0;
    x / ((df - 1.0).powi(4) * d2) * (((a * x + b) * x + cc) * x - df)
}

/// `x` at which `x + (1-x)/(d(d-1)) = r/d`.
pub fn fbc_psi_boundary(d: usize, r: usize) -> f64 {
    let df = d as f64;
    (r as f64 * (df - 1.0) - 1.0) / (df * df - df - 1.0)
}
