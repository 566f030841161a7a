//! Multipartite criteria: the bipartition scan and the tripartite Λ-map
//! test.
//!
//! The Λ map is `(Tr_A[.] I_A - X/r) ⊗ (Tr_B[.] I_B + X) ⊗ id_C`, so that
//!
//! `<Λ(rho), sigma> = <rho_C, sigma_C> + <rho_BC, sigma_BC>
//!                   - (<rho_AC, sigma_AC> + <rho, sigma>) / r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::STRICT_EPS;
use crate::error::{Error, Result};
use crate::qmat::{c, embed_with_identity, partial_trace, permute_subsystems, Bipartition, CMat, QState};

pub const MAX_SCAN_SUBSYSTEMS: usize = 12;

/// All `2^(n-1) - 1` cuts `S | S̄`, each with subsystem 0 in `S`.
pub fn enumerate_bipartitions(n: usize) -> Result<Vec<Bipartition>> {
    if n < 2 {
        return Err(Error::TooFewSubsystems { required: 2, got: n });
    }
    if n > MAX_SCAN_SUBSYSTEMS {
        return Err(Error::TooManySubsystems(n));
    }
    let full = (1usize << (n - 1)) - 1;
    (0..full)
        .map(|mask| {
            let kept: Vec<usize> = std::iter::once(0)
                .chain((1..n).filter(|i| mask >> (i - 1) & 1 == 1))
                .collect();
            Bipartition::new(kept)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutOverlap {
    pub kept: Vec<usize>,
    pub overlap_kept: f64,
    pub overlap_complement: f64,
    pub min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiVerdict {
    pub global: f64,
    pub cuts: Vec<CutOverlap>,
    /// Kept side of the cut attaining the smallest local overlap.
    pub minimizing: Vec<usize>,
    pub min_local: f64,
    pub detected: bool,
}

fn reduced_overlap(rho: &QState, sigma: &QState, kept: &[usize]) -> Result<f64> {
    rho.reduced(kept)?.overlap(&sigma.reduced(kept)?)
}

/// Detects that neither state is fully separable when the global overlap
/// exceeds every cut's smaller local overlap.
pub fn multipartite_ipc(rho: &QState, sigma: &QState) -> Result<MultiVerdict> {
    multipartite_ipc_with_eps(rho, sigma, STRICT_EPS)
}

pub fn multipartite_ipc_with_eps(rho: &QState, sigma: &QState, eps: f64) -> Result<MultiVerdict> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "state layouts {:?} and {:?} differ",
            rho.dims(),
            sigma.dims()
        )));
    }
    let n = rho.dims().len();
    if n < 3 {
        return Err(Error::TooFewSubsystems { required: 3, got: n });
    }
    let global = rho.overlap(sigma)?;
    let cuts = enumerate_bipartitions(n)?
        .par_iter()
        .map(|part| {
            let a = reduced_overlap(rho, sigma, part.kept())?;
            let b = reduced_overlap(rho, sigma, &part.complement(n))?;
            Ok(CutOverlap {
                kept: part.kept().to_vec(),
                overlap_kept: a,
                overlap_complement: b,
                min: a.min(b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = cuts
        .iter()
        .min_by(|x, y| x.min.total_cmp(&y.min))
        .expect("at least one cut");
    Ok(MultiVerdict {
        global,
        minimizing: best.kept.clone(),
        min_local: best.min,
        detected: global > best.min + eps,
        cuts,
    })
}

fn require_tripartite(s: &QState) -> Result<()> {
    match s.dims().len() {
        3 => Ok(()),
        n if n < 3 => Err(Error::TooFewSubsystems { required: 3, got: n }),
        n => Err(Error::DimensionMismatch(format!("Λ map needs exactly 3 subsystems, got {n}"))),
    }
}

/// Reduced overlaps entering `<Λ(rho), sigma>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaOverlaps {
    pub c: f64,
    pub bc: f64,
    pub ac: f64,
    pub abc: f64,
}

impl LambdaOverlaps {
    pub fn new(rho: &QState, sigma: &QState) -> Result<Self> {
        require_tripartite(rho)?;
        if rho.dims() != sigma.dims() {
            return Err(Error::DimensionMismatch(format!(
                "state layouts {:?} and {:?} differ",
                rho.dims(),
                sigma.dims()
            )));
        }
        Ok(Self {
            c: reduced_overlap(rho, sigma, &[2])?,
            bc: reduced_overlap(rho, sigma, &[1, 2])?,
            ac: reduced_overlap(rho, sigma, &[0, 2])?,
            abc: rho.overlap(sigma)?,
        })
    }

    /// `<Λ(rho), sigma>` at a real parameter `r > 0`.
    pub fn value(&self, r: f64) -> f64 {
        self.c + self.bc - (self.ac + self.abc) / r
    }

    /// Largest integer `r >= 1` with `value(r) < -eps`.
    pub fn r_op(&self, eps: f64) -> Option<usize> {
        let pos = self.c + self.bc + eps;
        let neg = self.ac + self.abc;
        if neg <= 0.0 {
            return None;
        }
        let mut r = ((neg / pos).ceil() as usize).saturating_sub(1).max(1);
        while r > 1 && self.value(r as f64) >= -eps {
            r -= 1;
        }
        while self.value((r + 1) as f64) < -eps {
            r += 1;
        }
        (self.value(r as f64) < -eps).then_some(r)
    }
}

pub fn lambda_map_value(rho: &QState, sigma: &QState, r: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::OutOfRange("Λ map needs r >= 1".into()));
    }
    Ok(LambdaOverlaps::new(rho, sigma)?.value(r as f64))
}

/// `Λ(X)` as a matrix, assembled from partial traces.
pub fn apply_lambda_map(x: &CMat, dims: &[usize], r: usize) -> Result<CMat> {
    if dims.len() != 3 {
        return Err(Error::DimensionMismatch(format!("Λ map needs exactly 3 subsystems, got {}", dims.len())));
    }
    if r == 0 {
        return Err(Error::OutOfRange("Λ map needs r >= 1".into()));
    }
    let keep = |k: &[usize]| -> Result<CMat> {
        let part = Bipartition::new(k.to_vec())?;
        embed_with_identity(&partial_trace(x, dims, &part)?, dims, &part)
    };
    let inv_r = c(1.0 / r as f64);
    Ok(keep(&[2])? + keep(&[1, 2])? - keep(&[0, 2])? * inv_r - x * inv_r)
}

/// What a negative Λ value establishes for both states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LambdaConclusion {
    /// Either genuinely multipartite entangled, or every decomposition into
    /// biseparable terms has a term across the AC cut with Schmidt number
    /// above `r`.
    GenuineOrAcSchmidtAbove { r: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaVerdict {
    pub r: usize,
    pub value: f64,
    pub overlaps: LambdaOverlaps,
    pub detected: bool,
    pub conclusion: Option<LambdaConclusion>,
    pub r_op: Option<usize>,
}

pub fn lambda_map_verdict(rho: &QState, sigma: &QState, r: usize) -> Result<LambdaVerdict> {
    if r == 0 {
        return Err(Error::OutOfRange("Λ map needs r >= 1".into()));
    }
    let overlaps = LambdaOverlaps::new(rho, sigma)?;
    let value = overlaps.value(r as f64);
    let detected = value < -STRICT_EPS;
    Ok(LambdaVerdict {
        r,
        value,
        overlaps,
        detected,
        conclusion: detected.then_some(LambdaConclusion::GenuineOrAcSchmidtAbove { r }),
        r_op: overlaps.r_op(STRICT_EPS),
    })
}

/// Closed form of `<Λ(rho), |GHZ><GHZ|>` for three-qudit noisy GHZ
/// `p |GHZ><GHZ| + (1-p) I/d^3`.
pub fn ghz_lambda_value(d: usize, p: f64, r: f64) -> f64 {
    let df = d as f64;
    p * (2.0 / df - (df + 1.0) / (r * df)) + (1.0 - p) * (df + 1.0) * (df - 1.0 / r) / df.powi(3)
}

/// `r` at which [`ghz_lambda_value`] changes sign.
pub fn ghz_lambda_boundary(d: usize, p: f64) -> f64 {
    let df = d as f64;
    (df + 1.0) * (p * df * df + 1.0 - p) / (2.0 * p * df * df + (1.0 - p) * (df + 1.0) * df)
}

/// Moves subsystem `order[k]` to position `k` for a tripartite state, used to
/// build product states across different cuts.
pub fn reorder(s: &QState, order: &[usize]) -> Result<QState> {
    let m = permute_subsystems(s.matrix(), s.dims(), order)?;
    let dims = order.iter().map(|&k| s.dims()[k]).collect();
    QState::new(dims, m)
}
