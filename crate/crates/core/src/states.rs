//! Named state families and seeded random-state generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{c, schmidt_decompose, Bipartition, CMat, CVec, PureVec, QState, C64};

/// Slack allowed when checking a parameter against its closed domain.
const PARAM_TOL: f64 = 1e-12;

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !(v >= lo - PARAM_TOL && v <= hi + PARAM_TOL) {
        return Err(Error::OutOfRange(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_local_dim(d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::OutOfRange(format!("local dimension {d} is below {min}")));
    }
    Ok(())
}

/// `sum_i |ii> / sqrt(d)`.
pub fn max_entangled(d: usize) -> Result<PureVec> {
    check_local_dim(d, 2)?;
    let mut v = CVec::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = c(1.0);
    }
    PureVec::normalized(vec![d, d], v)
}

/// Raw isotropic operator
/// `(1-x)/(d^2-1) I + (d^2 x - 1)/(d^2-1) |Psi><Psi|` for any `x` in
/// `[0, 1]`. Not positive below `x = 1/d^2`.
pub fn isotropic_operator(d: usize, x: f64) -> Result<CMat> {
    check_local_dim(d, 2)?;
    check_range("x", x, 0.0, 1.0)?;
    let n = d * d;
    let dd = n as f64;
    let psi = max_entangled(d)?.projector();
    Ok(CMat::identity(n, n) * c((1.0 - x) / (dd - 1.0)) + psi * c((dd * x - 1.0) / (dd - 1.0)))
}

/// Isotropic state with fidelity `x = <Psi|rho|Psi>`. Only
/// `x >= 1/d^2` gives a positive operator; smaller `x` is rejected.
pub fn isotropic(d: usize, x: f64) -> Result<QState> {
    check_local_dim(d, 2)?;
    let floor = 1.0 / (d * d) as f64;
    if x < floor - PARAM_TOL {
        return Err(Error::InvalidState(format!(
            "isotropic operator at x = {x} < 1/d^2 = {floor} is not positive"
        )));
    }
    Ok(QState::from_parts(vec![d, d], isotropic_operator(d, x)?))
}

/// `(1-x) I_{(d-1)^2} / (d-1)^2 + x |Psi><Psi|`, where `I_{(d-1)^2}`
/// projects onto `|ij>` with `i, j <= d-2`.
pub fn example2(d: usize, x: f64) -> Result<QState> {
    check_local_dim(d, 3)?;
    check_range("x", x, 0.0, 1.0)?;
    let n = d * d;
    let mut m = max_entangled(d)?.projector() * c(x);
    let w = (1.0 - x) / ((d - 1) * (d - 1)) as f64;
    for i in 0..d - 1 {
        for j in 0..d - 1 {
            m[(i * d + j, i * d + j)] += c(w);
        }
    }
    debug_assert_eq!(m.nrows(), n);
    Ok(QState::from_parts(vec![d, d], m))
}

/// `y sum_{i<d-1} |ii> + sqrt(1 - (d-1) y^2) |(d-1)(d-1)>`.
pub fn theta_state(d: usize, y: f64) -> Result<PureVec> {
    check_local_dim(d, 2)?;
    let y_max = 1.0 / ((d - 1) as f64).sqrt();
    check_range("y", y, 0.0, y_max)?;
    let y = y.clamp(0.0, y_max);
    let mut v = CVec::zeros(d * d);
    for i in 0..d - 1 {
        v[i * d + i] = c(y);
    }
    let tail = (1.0 - (d - 1) as f64 * y * y).max(0.0).sqrt();
    v[d * d - 1] = c(tail);
    PureVec::normalized(vec![d, d], v)
}

/// `sum_j |j>^{⊗n} / sqrt(d)`.
pub fn ghz_pure(n: usize, d: usize) -> Result<PureVec> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("GHZ needs n >= 2 parties, got {n}")));
    }
    check_local_dim(d, 2)?;
    let dims = vec![d; n];
    let total: usize = dims.iter().product();
    let step = (total - 1) / (d - 1);
    let mut v = CVec::zeros(total);
    for j in 0..d {
        v[j * step] = c(1.0);
    }
    PureVec::normalized(dims, v)
}

/// `p |GHZ><GHZ| + (1-p) I / d^n`.
pub fn ghz_noisy(n: usize, d: usize, p: f64) -> Result<QState> {
    check_range("p", p, 0.0, 1.0)?;
    let ghz = ghz_pure(n, d)?;
    let total = ghz.vec().len();
    let m = ghz.projector() * c(p) + CMat::identity(total, total) * c((1.0 - p) / total as f64);
    Ok(QState::from_parts(ghz.dims().to_vec(), m))
}

/// The two pure components of [`example3_state`] with their weights:
/// `(|00>+|11>+|22>)/sqrt(3)` and `(|23>+|32>)/sqrt(2)` on `C^4 ⊗ C^4`.
pub fn example3_components() -> [(f64, PureVec); 2] {
    let mut psi3 = CVec::zeros(16);
    for i in 0..3 {
        psi3[i * 4 + i] = c(1.0);
    }
    let mut phi = CVec::zeros(16);
    phi[2 * 4 + 3] = c(1.0);
    phi[3 * 4 + 2] = c(1.0);
    [
        (0.5, PureVec::normalized(vec![4, 4], psi3).expect("nonzero")),
        (0.5, PureVec::normalized(vec![4, 4], phi).expect("nonzero")),
    ]
}

pub fn example3_state() -> QState {
    let [(w0, a), (w1, b)] = example3_components();
    QState::from_parts(vec![4, 4], a.projector() * c(w0) + b.projector() * c(w1))
}

/// Verifier family for [`example3_state`]:
/// `sqrt(1/3+t)(|00>+|11>) + sqrt(1/3-2t)|22>`, `t` in `[-1/3, 1/6]`.
pub fn example3_verifier(t: f64) -> Result<PureVec> {
    check_range("t", t, -1.0 / 3.0, 1.0 / 6.0)?;
    let mut v = CVec::zeros(16);
    let a = (1.0 / 3.0 + t).max(0.0).sqrt();
    v[0] = c(a);
    v[5] = c(a);
    v[10] = c((1.0 / 3.0 - 2.0 * t).max(0.0).sqrt());
    PureVec::normalized(vec![4, 4], v)
}

/// `N sum_i lambda_i^{-1/2} |e_i f_i>` built from the Schmidt decomposition of
/// a bipartite pure state. Overlap ratio with the source equals its Schmidt
/// rank.
pub fn verifier_state(v: &PureVec) -> Result<PureVec> {
    if v.dims().len() != 2 {
        return Err(Error::NotBipartite(v.dims().len()));
    }
    let sd = schmidt_decompose(v, &Bipartition::single(0))?;
    let mut out = CVec::zeros(v.vec().len());
    for ((l, e), f) in sd.coeffs.iter().zip(&sd.left_vecs).zip(&sd.right_vecs) {
        out += e.kronecker(f) * c(1.0 / l.sqrt());
    }
    PureVec::normalized(v.dims().to_vec(), out)
}

fn gaussian_vec(rng: &mut impl Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn random_pure_with(dims: &[usize], rng: &mut impl Rng) -> Result<PureVec> {
    let n = dims.iter().product();
    PureVec::normalized(dims.to_vec(), gaussian_vec(rng, n))
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure(dims: &[usize], seed: u64) -> Result<PureVec> {
    random_pure_with(dims, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_mixed_with(dims: &[usize], rank: usize, rng: &mut impl Rng) -> Result<QState> {
    let n: usize = dims.iter().product();
    if rank == 0 || rank > n {
        return Err(Error::OutOfRange(format!("rank {rank} outside 1..={n}")));
    }
    let g = CMat::from_fn(n, rank, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    Ok(QState::from_parts(dims.to_vec(), crate::qmat::hermitize(gg.unscale(tr))))
}

/// Ginibre-induced mixed state `G G^dagger / Tr` with `G` an
/// `n x rank` complex Gaussian matrix.
pub fn random_mixed(dims: &[usize], rank: usize, seed: u64) -> Result<QState> {
    random_mixed_with(dims, rank, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Product of independent random pure states, one per subsystem.
pub fn random_product_pure(dims: &[usize], rng: &mut impl Rng) -> Result<PureVec> {
    let mut parts = dims.iter().map(|&d| random_pure_with(&[d], rng));
    let mut acc = parts
        .next()
        .ok_or_else(|| Error::DimensionMismatch("empty layout".into()))??;
    for p in parts {
        acc = acc.tensor(&p?);
    }
    Ok(acc)
}

fn dirichlet_weights(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn mix_pure(dims: &[usize], weights: &[f64], vecs: &[PureVec]) -> QState {
    let n: usize = dims.iter().product();
    let mut m = CMat::zeros(n, n);
    for (w, v) in weights.iter().zip(vecs) {
        m += v.projector() * c(*w);
    }
    QState::from_parts(dims.to_vec(), crate::qmat::hermitize(m))
}

/// Fully separable state: Dirichlet-weighted mixture of `terms` random
/// product pure states.
pub fn random_separable(dims: &[usize], terms: usize, rng: &mut impl Rng) -> Result<QState> {
    let vecs = (0..terms)
        .map(|_| random_product_pure(dims, rng))
        .collect::<Result<Vec<_>>>()?;
    let w = dirichlet_weights(terms, rng);
    Ok(mix_pure(dims, &w, &vecs))
}

/// Random bipartite pure state with its Schmidt series truncated to the `r`
/// largest terms and renormalized, so its Schmidt rank is at most `r`.
pub fn random_truncated_pure(dims: &[usize], r: usize, rng: &mut impl Rng) -> Result<PureVec> {
    if dims.len() != 2 {
        return Err(Error::NotBipartite(dims.len()));
    }
    let v = random_pure_with(dims, rng)?;
    let sd = schmidt_decompose(&v, &Bipartition::single(0))?;
    let mut out = CVec::zeros(v.vec().len());
    for ((l, e), f) in sd.coeffs.iter().zip(&sd.left_vecs).zip(&sd.right_vecs).take(r) {
        out += e.kronecker(f) * c(l.sqrt());
    }
    PureVec::normalized(dims.to_vec(), out)
}

/// Mixture of `terms` pure states of Schmidt rank at most `r`; its Schmidt
/// number is at most `r` by construction.
pub fn random_bounded_schmidt_mixture(
    dims: &[usize],
    r: usize,
    terms: usize,
    rng: &mut impl Rng,
) -> Result<QState> {
    let vecs = (0..terms)
        .map(|_| random_truncated_pure(dims, r, rng))
        .collect::<Result<Vec<_>>>()?;
    let w = dirichlet_weights(terms, rng);
    Ok(mix_pure(dims, &w, &vecs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Isotropic,
    Example2,
    Theta,
    GhzNoisy,
    GhzPure,
    MaxEntangled,
    Example3,
    Verifier,
    RandomMixed,
    RandomPure,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Source state for the `verifier` family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub of: Option<Box<StateSpec>>,
}

/// JSON form `{"family": ..., "params": {...}, "seed": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub family: Family,
    #[serde(default)]
    pub params: StateParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug)]
pub enum BuiltState {
    Mixed(QState),
    Pure(PureVec),
}

impl BuiltState {
    pub fn density(&self) -> QState {
        match self {
            BuiltState::Mixed(s) => s.clone(),
            BuiltState::Pure(v) => v.to_state(),
        }
    }
}

fn need<T: Clone>(v: &Option<T>, name: &str, family: Family) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::OutOfRange(format!("{family:?} requires parameter `{name}`")))
}

impl StateSpec {
    pub fn new(family: Family, params: StateParams) -> Self {
        Self {
            family,
            params,
            seed: None,
        }
    }

    pub fn build(&self) -> Result<BuiltState> {
        let p = &self.params;
        let f = self.family;
        let seed = self.seed.unwrap_or(0);
        Ok(match f {
            Family::Isotropic => BuiltState::Mixed(isotropic(need(&p.d, "d", f)?, need(&p.x, "x", f)?)?),
            Family::Example2 => BuiltState::Mixed(example2(need(&p.d, "d", f)?, need(&p.x, "x", f)?)?),
            Family::Theta => BuiltState::Pure(theta_state(need(&p.d, "d", f)?, need(&p.y, "y", f)?)?),
            Family::GhzNoisy => BuiltState::Mixed(ghz_noisy(
                need(&p.n, "n", f)?,
                p.d.unwrap_or(2),
                need(&p.p, "p", f)?,
            )?),
            Family::GhzPure => BuiltState::Pure(ghz_pure(need(&p.n, "n", f)?, p.d.unwrap_or(2))?),
            Family::MaxEntangled => BuiltState::Pure(max_entangled(need(&p.d, "d", f)?)?),
            Family::Example3 => BuiltState::Mixed(example3_state()),
            Family::Verifier => {
                let src = need(&p.of, "of", f)?;
                match src.build()? {
                    BuiltState::Pure(v) => BuiltState::Pure(verifier_state(&v)?),
                    BuiltState::Mixed(_) => {
                        return Err(Error::InvalidState("verifier source must be a pure state".into()))
                    }
                }
            }
            Family::RandomMixed => {
                let dims = self.layout()?;
                let n: usize = dims.iter().product();
                BuiltState::Mixed(random_mixed(&dims, p.rank.unwrap_or(n), seed)?)
            }
            Family::RandomPure => BuiltState::Pure(random_pure(&self.layout()?, seed)?),
        })
    }

    fn layout(&self) -> Result<Vec<usize>> {
        match (&self.params.dims, self.params.d) {
            (Some(dims), _) => Ok(dims.clone()),
            (None, Some(d)) => Ok(vec![d, d]),
            (None, None) => Err(Error::OutOfRange(format!(
                "{:?} requires `dims` or `d`",
                self.family
            ))),
        }
    }
}
