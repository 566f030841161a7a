//! Randomized-measurement simulation and overlap estimation.
//!
//! Both states are measured in the computational basis after the same
//! random product unitary `u_1 ⊗ ... ⊗ u_{m+n}`. The first `m` qudits form
//! side A. For outcome distributions `P`, `Q` of a subsystem `X` made of `q`
//! qudits,
//!
//! `Tr[rho_X sigma_X] = l^q sum_{s,t} (-l)^{-D(s,t)} E_U[P(s) Q(t)]`
//!
//! with `D` the Hamming distance between qudit symbols.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::criteria::{sn_bound_from_ratio, STRICT_EPS};
use crate::error::{Error, Result};
use crate::qmat::{c, CMat, QState, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    #[default]
    Haar,
    /// Single-qubit Clifford group; `l = 2` only.
    Clifford,
}

/// Shots per setting. Serialized as the string `"exact"` or an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Finite(u64),
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Finite(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(Shots::Finite(n)),
            Raw::Word(w) if w == "exact" => Ok(Shots::Exact),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "shots must be \"exact\" or an integer, got {w:?}"
            ))),
        }
    }
}

fn default_ratio_guard() -> f64 {
    10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub local_dim: usize,
    pub m: usize,
    pub n: usize,
    pub n_unitaries: usize,
    pub shots_per_setting: Shots,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub design: Design,
    /// A ratio is reported only if its denominator exceeds this many
    /// standard errors.
    #[serde(default = "default_ratio_guard")]
    pub ratio_guard: f64,
}

impl ProtocolConfig {
    pub fn new(local_dim: usize, m: usize, n: usize, n_unitaries: usize, shots: Shots, seed: u64) -> Self {
        Self {
            local_dim,
            m,
            n,
            n_unitaries,
            shots_per_setting: shots,
            seed,
            design: Design::Haar,
            ratio_guard: default_ratio_guard(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.local_dim < 2 {
            return Err(Error::Protocol(format!("local dimension {} < 2", self.local_dim)));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::Protocol("each side needs at least one qudit".into()));
        }
        if self.n_unitaries < 2 {
            return Err(Error::Protocol(format!(
                "need at least 2 settings, got {}",
                self.n_unitaries
            )));
        }
        if let Shots::Finite(k) = self.shots_per_setting {
            if k < 2 {
                return Err(Error::Protocol(format!(
                    "need at least 2 shots per setting for unbiased second moments, got {k}"
                )));
            }
        }
        if self.design == Design::Clifford && self.local_dim != 2 {
            return Err(Error::Protocol("Clifford sampling needs local dimension 2".into()));
        }
        Ok(())
    }

    pub fn dim_a(&self) -> usize {
        self.local_dim.pow(self.m as u32)
    }

    pub fn dim_b(&self) -> usize {
        self.local_dim.pow(self.n as u32)
    }

    pub fn qudits(&self) -> usize {
        self.m + self.n
    }

    fn check_state(&self, s: &QState) -> Result<()> {
        let grouped = [self.dim_a(), self.dim_b()];
        let split = vec![self.local_dim; self.qudits()];
        if s.dims() != grouped && s.dims() != split.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "state dims {:?} incompatible with {} + {} qudits of dimension {}",
                s.dims(),
                self.m,
                self.n,
                self.local_dim
            )));
        }
        Ok(())
    }
}

/// Haar-random `l x l` unitary: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary(l: usize, rng: &mut impl Rng) -> CMat {
    let z = CMat::from_fn(l, l, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..l {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        for i in 0..l {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// The 24 single-qubit Cliffords modulo global phase.
pub fn clifford_group() -> &'static [CMat] {
    static GROUP: OnceLock<Vec<CMat>> = OnceLock::new();
    GROUP.get_or_init(|| {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMat::from_row_slice(2, 2, &[c(s2), c(s2), c(s2), c(-s2)]);
        let s = CMat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), C64::new(0.0, 1.0)]);
        let key = |m: &CMat| -> Vec<i64> {
            let pivot = m.iter().find(|z| z.norm() > 1e-6).copied().unwrap_or(c(1.0));
            let phase = pivot.conj() / pivot.norm();
            m.iter()
                .flat_map(|z| {
                    let w = z * phase;
                    [(w.re * 1e6).round() as i64, (w.im * 1e6).round() as i64]
                })
                .collect()
        };
        let mut seen = std::collections::HashSet::new();
        let mut group = vec![CMat::identity(2, 2)];
        seen.insert(key(&group[0]));
        let mut i = 0;
        while i < group.len() {
            for g in [&h, &s] {
                let next = g * &group[i];
                if seen.insert(key(&next)) {
                    group.push(next);
                }
            }
            i += 1;
        }
        group
    })
}

pub fn sample_local_unitary(l: usize, design: Design, rng: &mut impl Rng) -> Result<CMat> {
    if l < 2 {
        return Err(Error::Protocol(format!("local dimension {l} < 2")));
    }
    match design {
        Design::Haar => Ok(haar_unitary(l, rng)),
        Design::Clifford if l == 2 => {
            let g = clifford_group();
            Ok(g[rng.random_range(0..g.len())].clone())
        }
        Design::Clifford => Err(Error::Protocol("Clifford sampling needs local dimension 2".into())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcomes {
    /// Exact outcome probabilities for `rho` (`p`) and `sigma` (`q`).
    Exact { p: Vec<f64>, q: Vec<f64> },
    /// Shot counts per outcome.
    Counts { p: Vec<u64>, q: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub setting: usize,
    /// One unitary per qudit, side A first.
    pub unitaries: Vec<CMat>,
    pub outcomes: Outcomes,
}

fn setting_rng(seed: u64, setting: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(setting as u64);
    rng
}

fn outcome_probabilities(s: &QState, u: &CMat) -> Vec<f64> {
    let rotated = u * s.matrix() * u.adjoint();
    rotated.diagonal().iter().map(|z| z.re.max(0.0)).collect()
}

/// Multinomial draw by sequential conditional binomials.
fn sample_counts(p: &[f64], shots: u64, rng: &mut impl Rng) -> Vec<u64> {
    let mut left = shots;
    let mut mass: f64 = p.iter().sum();
    let mut out = vec![0u64; p.len()];
    for (i, &pi) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == p.len() || mass <= 0.0 {
            out[i] = left;
            break;
        }
        let prob = (pi / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, prob).expect("probability in [0, 1]").sample(rng);
        out[i] = k;
        left -= k;
        mass -= pi;
    }
    out
}

/// Simulates every setting of the protocol on the pair `(rho, sigma)`.
pub fn run_protocol(rho: &QState, sigma: &QState, cfg: &ProtocolConfig) -> Result<Vec<MeasurementRecord>> {
    cfg.validate()?;
    cfg.check_state(rho)?;
    cfg.check_state(sigma)?;
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "state layouts {:?} and {:?} differ",
            rho.dims(),
            sigma.dims()
        )));
    }
    (0..cfg.n_unitaries)
        .into_par_iter()
        .map(|k| {
            let mut rng = setting_rng(cfg.seed, k);
            let unitaries = (0..cfg.qudits())
                .map(|_| sample_local_unitary(cfg.local_dim, cfg.design, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let u = unitaries[1..]
                .iter()
                .fold(unitaries[0].clone(), |acc, x| acc.kronecker(x));
            let p = outcome_probabilities(rho, &u);
            let q = outcome_probabilities(sigma, &u);
            let outcomes = match cfg.shots_per_setting {
                Shots::Exact => Outcomes::Exact { p, q },
                Shots::Finite(m) => Outcomes::Counts {
                    p: sample_counts(&p, m, &mut rng),
                    q: sample_counts(&q, m, &mut rng),
                },
            };
            Ok(MeasurementRecord {
                setting: k,
                unitaries,
                outcomes,
            })
        })
        .collect()
}

/// Applies `⊗_i k` with `k(a,a) = 1`, `k(a,b) = -1/l` to a vector over
/// `q` qudits.
fn apply_kernel(v: &[f64], l: usize, q: usize) -> Vec<f64> {
    let mut cur = v.to_vec();
    let lf = l as f64;
    for axis in 0..q {
        let stride = l.pow((q - 1 - axis) as u32);
        let block = stride * l;
        for base in (0..cur.len()).step_by(block) {
            for off in 0..stride {
                let sum: f64 = (0..l).map(|a| cur[base + a * stride + off]).sum();
                for a in 0..l {
                    let idx = base + a * stride + off;
                    cur[idx] = cur[idx] * (1.0 + 1.0 / lf) - sum / lf;
                }
            }
        }
    }
    cur
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn marginal_a(p: &[f64], dim_b: usize) -> Vec<f64> {
    p.chunks(dim_b).map(|ch| ch.iter().sum()).collect()
}

fn marginal_b(p: &[f64], dim_b: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim_b];
    for (i, x) in p.iter().enumerate() {
        out[i % dim_b] += x;
    }
    out
}

/// Per-setting values: cross overlaps `[AB, A, B]`, then `rho` and `sigma`
/// purities in the same order.
fn setting_values(rec: &MeasurementRecord, cfg: &ProtocolConfig) -> Result<[f64; 9]> {
    let l = cfg.local_dim;
    let (da, db) = (cfg.dim_a(), cfg.dim_b());
    let total = da * db;
    let (p, q, shots): (Vec<f64>, Vec<f64>, Option<(f64, f64)>) = match &rec.outcomes {
        Outcomes::Exact { p, q } => (p.clone(), q.clone(), None),
        Outcomes::Counts { p, q } => {
            let mp: u64 = p.iter().sum();
            let mq: u64 = q.iter().sum();
            if mp < 2 || mq < 2 {
                return Err(Error::Protocol(format!(
                    "setting {} has fewer than 2 shots",
                    rec.setting
                )));
            }
            (
                p.iter().map(|&x| x as f64).collect(),
                q.iter().map(|&x| x as f64).collect(),
                Some((mp as f64, mq as f64)),
            )
        }
    };
    if p.len() != total || q.len() != total {
        return Err(Error::DimensionMismatch(format!(
            "setting {} has {} outcomes, expected {total}",
            rec.setting,
            p.len()
        )));
    }
    let parts = [
        (p.clone(), q.clone(), cfg.qudits()),
        (marginal_a(&p, db), marginal_a(&q, db), cfg.m),
        (marginal_b(&p, db), marginal_b(&q, db), cfg.n),
    ];
    let mut out = [0.0; 9];
    for (i, (px, qx, nq)) in parts.iter().enumerate() {
        let dx = l.pow(*nq as u32) as f64;
        let kq = apply_kernel(qx, l, *nq);
        let kp = apply_kernel(px, l, *nq);
        match shots {
            None => {
                out[i] = dx * dot(px, &kq);
                out[3 + i] = dx * dot(px, &kp);
                out[6 + i] = dx * dot(qx, &kq);
            }
            Some((mp, mq)) => {
                // independent shots make the plug-in cross term unbiased;
                // within-state terms drop the coincident-shot diagonal
                out[i] = dx * dot(px, &kq) / (mp * mq);
                out[3 + i] = dx * (dot(px, &kp) - mp) / (mp * (mp - 1.0));
                out[6 + i] = dx * (dot(qx, &kq) - mq) / (mq * (mq - 1.0));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Jackknife standard error over settings.
    pub se: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub value: f64,
    pub se: f64,
    /// False when the denominator is within `ratio_guard` standard errors
    /// of zero.
    pub reliable: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityEstimates {
    pub rho: Estimate,
    pub rho_a: Estimate,
    pub rho_b: Estimate,
    pub sigma: Estimate,
    pub sigma_a: Estimate,
    pub sigma_b: Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapEstimate {
    pub settings: usize,
    pub global: Estimate,
    pub local_a: Estimate,
    pub local_b: Estimate,
    pub purities: PurityEstimates,
    pub s_a: RatioEstimate,
    pub s_b: RatioEstimate,
    /// Largest reliable ratio, if any.
    pub s_hat: Option<f64>,
    pub s_hat_se: Option<f64>,
}

impl OverlapEstimate {
    /// `max(1, ceil(s_hat - eps))`, or 1 when no ratio is reliable.
    pub fn sn_bound(&self) -> u32 {
        self.s_hat.map_or(1, |s| sn_bound_from_ratio(s, STRICT_EPS))
    }
}

fn mean_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    // the jackknife standard error of a mean is the usual sample one
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate {
        value: mean,
        se: (var / n).sqrt(),
    }
}

fn ratio_estimate(num: &[f64], den: &[f64], den_est: Estimate, guard: f64) -> RatioEstimate {
    let n = num.len() as f64;
    let (sn, sd): (f64, f64) = (num.iter().sum(), den.iter().sum());
    let value = sn / sd;
    let loo: Vec<f64> = num.iter().zip(den).map(|(a, b)| (sn - a) / (sd - b)).collect();
    let loo_mean = loo.iter().sum::<f64>() / n;
    let var = (n - 1.0) / n * loo.iter().map(|t| (t - loo_mean).powi(2)).sum::<f64>();
    RatioEstimate {
        value,
        se: var.sqrt(),
        reliable: den_est.value > guard * den_est.se && value.is_finite(),
    }
}

/// Estimates global and local overlaps, purities, and the ratio `S` from
/// measurement records.
pub fn estimate_overlaps(records: &[MeasurementRecord], cfg: &ProtocolConfig) -> Result<OverlapEstimate> {
    if cfg.local_dim < 2 || cfg.m == 0 || cfg.n == 0 {
        return Err(Error::Protocol("invalid protocol layout".into()));
    }
    if records.len() < 2 {
        return Err(Error::Protocol(format!(
            "need at least 2 settings, got {}",
            records.len()
        )));
    }
    let vals = records
        .par_iter()
        .map(|r| setting_values(r, cfg))
        .collect::<Result<Vec<_>>>()?;
    let column = |i: usize| -> Vec<f64> { vals.iter().map(|v| v[i]).collect() };
    let cols: Vec<Vec<f64>> = (0..9).map(column).collect();
    let est: Vec<Estimate> = cols.iter().map(|c| mean_estimate(c)).collect();
    let s_a = ratio_estimate(&cols[0], &cols[1], est[1], cfg.ratio_guard);
    let s_b = ratio_estimate(&cols[0], &cols[2], est[2], cfg.ratio_guard);
    let best = [s_a, s_b]
        .into_iter()
        .filter(|r| r.reliable)
        .max_by(|x, y| x.value.total_cmp(&y.value));
    Ok(OverlapEstimate {
        settings: records.len(),
        global: est[0],
        local_a: est[1],
        local_b: est[2],
        purities: PurityEstimates {
            rho: est[3],
            rho_a: est[4],
            rho_b: est[5],
            sigma: est[6],
            sigma_a: est[7],
            sigma_b: est[8],
        },
        s_a,
        s_b,
        s_hat: best.map(|r| r.value),
        s_hat_se: best.map(|r| r.se),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapTestEstimate {
    pub value: f64,
    pub se: f64,
    pub shots: u64,
    pub zeros: u64,
}

/// Simulated swap test: the ancilla reads 0 with probability
/// `(1 + Tr[rho sigma]) / 2`.
pub fn swap_test_overlap(rho: &QState, sigma: &QState, shots: u64, seed: u64) -> Result<SwapTestEstimate> {
    if shots == 0 {
        return Err(Error::Protocol("swap test needs at least one shot".into()));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "total dimensions {} and {} differ",
            rho.dim(),
            sigma.dim()
        )));
    }
    let overlap = crate::qmat::hs_inner(rho.matrix(), sigma.matrix())?;
    let p0 = ((1.0 + overlap) / 2.0).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = Binomial::new(shots, p0).expect("probability in [0, 1]").sample(&mut rng);
    let f = zeros as f64 / shots as f64;
    Ok(SwapTestEstimate {
        value: 2.0 * f - 1.0,
        se: 2.0 * (f * (1.0 - f) / shots as f64).sqrt(),
        shots,
        zeros,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
enum OutcomesJson {
    Exact {
        p: BTreeMap<String, f64>,
        q: BTreeMap<String, f64>,
    },
    Counts {
        p: BTreeMap<String, u64>,
        q: BTreeMap<String, u64>,
    },
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    setting: usize,
    local_dim: usize,
    qudits: usize,
    /// Row-major entries of each unitary as `[re, im]` pairs.
    unitaries: Vec<Vec<[f64; 2]>>,
    outcomes: OutcomesJson,
}

/// Outcome label: qudit symbols concatenated, or joined by `.` when `l > 10`.
fn outcome_key(mut idx: usize, l: usize, q: usize) -> String {
    let mut digits = vec![0usize; q];
    for d in digits.iter_mut().rev() {
        *d = idx % l;
        idx /= l;
    }
    let sep = if l > 10 { "." } else { "" };
    digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(sep)
}

fn parse_key(key: &str, l: usize, q: usize) -> Result<usize> {
    let digits: Vec<&str> = if l > 10 {
        key.split('.').collect()
    } else {
        key.split("").filter(|s| !s.is_empty()).collect()
    };
    if digits.len() != q {
        return Err(Error::Protocol(format!("outcome label {key:?} has wrong length")));
    }
    digits.iter().try_fold(0usize, |acc, d| {
        let v: usize = d
            .parse()
            .map_err(|_| Error::Protocol(format!("bad outcome label {key:?}")))?;
        if v >= l {
            return Err(Error::Protocol(format!("symbol {v} out of range in {key:?}")));
        }
        Ok(acc * l + v)
    })
}

fn to_map<T: Copy + PartialEq + Default>(v: &[T], l: usize, q: usize, keep_zeros: bool) -> BTreeMap<String, T> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| keep_zeros || **x != T::default())
        .map(|(i, x)| (outcome_key(i, l, q), *x))
        .collect()
}

fn from_map<T: Copy + Default>(m: &BTreeMap<String, T>, l: usize, q: usize) -> Result<Vec<T>> {
    let mut out = vec![T::default(); l.pow(q as u32)];
    for (k, v) in m {
        out[parse_key(k, l, q)?] = *v;
    }
    Ok(out)
}

impl MeasurementRecord {
    fn to_json(&self, l: usize) -> RecordJson {
        let q = self.unitaries.len();
        let outcomes = match &self.outcomes {
            Outcomes::Exact { p, q: qq } => OutcomesJson::Exact {
                p: to_map(p, l, q, true),
                q: to_map(qq, l, q, true),
            },
            Outcomes::Counts { p, q: qq } => OutcomesJson::Counts {
                p: to_map(p, l, q, false),
                q: to_map(qq, l, q, false),
            },
        };
        RecordJson {
            setting: self.setting,
            local_dim: l,
            qudits: q,
            unitaries: self
                .unitaries
                .iter()
                .map(|u| u.transpose().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
            outcomes,
        }
    }

    fn from_json(j: RecordJson) -> Result<Self> {
        let (l, q) = (j.local_dim, j.qudits);
        if l < 2 || q == 0 || j.unitaries.len() != q {
            return Err(Error::Protocol(format!("malformed record for setting {}", j.setting)));
        }
        let unitaries = j
            .unitaries
            .iter()
            .map(|flat| {
                if flat.len() != l * l {
                    return Err(Error::Protocol(format!("unitary has {} entries", flat.len())));
                }
                let entries: Vec<C64> = flat.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                Ok(CMat::from_row_slice(l, l, &entries))
            })
            .collect::<Result<Vec<_>>>()?;
        let outcomes = match &j.outcomes {
            OutcomesJson::Exact { p, q: qq } => Outcomes::Exact {
                p: from_map(p, l, q)?,
                q: from_map(qq, l, q)?,
            },
            OutcomesJson::Counts { p, q: qq } => Outcomes::Counts {
                p: from_map(p, l, q)?,
                q: from_map(qq, l, q)?,
            },
        };
        Ok(Self {
            setting: j.setting,
            unitaries,
            outcomes,
        })
    }
}

/// Writes one JSON object per line.
pub fn write_records(w: &mut impl Write, records: &[MeasurementRecord], local_dim: usize) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *w, &r.to_json(local_dim))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_records(r: impl BufRead) -> Result<Vec<MeasurementRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(MeasurementRecord::from_json(serde_json::from_str(&line)?)?);
    }
    Ok(out)
}
