//! Dense complex linear algebra over multi-qudit Hilbert spaces.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. A composite space with
//! subsystem dimensions `[d_0, d_1, ..., d_{n-1}]` is indexed row-major, so
//! the basis vector `|i_0 i_1 ... i_{n-1}>` sits at
//! `i_0 * (d_1 ... d_{n-1}) + ... + i_{n-1}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Entrywise tolerance on `M - M^dagger` for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue a density matrix may have. Eigen-solvers leave noise of
/// this order on rank-deficient states.
pub const PSD_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-12;
/// Squared singular values at or below this are treated as zero.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entrywise deviation `max |M_ij - conj(M_ji)|`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

fn check_hermitian(m: &CMat) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::DimensionMismatch("empty subsystem layout".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimension {d} is below 2"
        )));
    }
    Ok(())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets of every basis state of the listed subsystems inside the full
/// space, enumerated row-major over those subsystems.
fn offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &k in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &base in &out {
            for digit in 0..dims[k] {
                next.push(base + digit * st[k]);
            }
        }
        out = next;
    }
    out
}

/// A set of subsystem indices `S`; the complement `S̄` is implied by the
/// layout it is applied to. Indices are kept sorted and unique.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    kept: Vec<usize>,
}

impl Bipartition {
    pub fn new(kept: impl Into<Vec<usize>>) -> Result<Self> {
        let mut kept = kept.into();
        kept.sort_unstable();
        let len = kept.len();
        kept.dedup();
        if kept.len() != len {
            return Err(Error::DimensionMismatch(
                "repeated subsystem index in bipartition".into(),
            ));
        }
        if kept.is_empty() {
            return Err(Error::DimensionMismatch("bipartition keeps no subsystem".into()));
        }
        Ok(Self { kept })
    }

    /// The bipartition keeping only subsystem `k`.
    pub fn single(k: usize) -> Self {
        Self { kept: vec![k] }
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|k| !self.kept.contains(k)).collect()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.kept.iter().find(|&&k| k >= n) {
            Some(k) => Err(Error::DimensionMismatch(format!(
                "subsystem index {k} out of range for {n} subsystems"
            ))),
            None => Ok(()),
        }
    }

    /// Checks that the cut is proper: neither side empty.
    pub fn validate_proper(&self, n: usize) -> Result<()> {
        self.validate(n)?;
        if self.kept.len() == n {
            return Err(Error::DimensionMismatch(
                "bipartition keeps every subsystem".into(),
            ));
        }
        Ok(())
    }
}

/// Density operator with an explicit subsystem layout.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    dims: Vec<usize>,
    matrix: CMat,
}

impl QState {
    /// Validates Hermiticity, unit trace and positivity (to tolerance).
    pub fn new(dims: Vec<usize>, matrix: CMat) -> Result<Self> {
        check_dims(&dims)?;
        let n = product(&dims);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but dims {:?} need side {}",
                matrix.nrows(),
                matrix.ncols(),
                dims,
                n
            )));
        }
        let dev = hermitian_deviation(&matrix);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let min = eig_hermitian(&matrix)?.values[0];
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {min:e} is negative"
            )));
        }
        Ok(Self { dims, matrix })
    }

    /// For operators that are density matrices by construction.
    pub(crate) fn from_parts(dims: Vec<usize>, matrix: CMat) -> Self {
        debug_assert_eq!(product(&dims), matrix.nrows());
        Self { dims, matrix }
    }

    pub fn from_pure(v: &PureVec) -> Self {
        Self::from_parts(v.dims.clone(), v.projector())
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let n = product(&dims);
        Ok(Self::from_parts(dims, CMat::identity(n, n) * c(1.0 / n as f64)))
    }

    /// Convex combination of states sharing a layout. Weights are
    /// normalized to sum to one.
    pub fn mixture(terms: &[(f64, &QState)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?
            .1;
        let total: f64 = terms.iter().map(|(w, _)| *w).sum();
        if terms.iter().any(|(w, _)| *w < 0.0) || total <= 0.0 {
            return Err(Error::InvalidState("mixture weights must be nonnegative".into()));
        }
        let mut m = CMat::zeros(first.dim(), first.dim());
        for (w, s) in terms {
            if s.dims != first.dims {
                return Err(Error::DimensionMismatch(format!(
                    "mixing dims {:?} with {:?}",
                    s.dims, first.dims
                )));
            }
            m += &s.matrix * c(*w / total);
        }
        Ok(Self::from_parts(first.dims.clone(), m))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tensor(&self, other: &QState) -> QState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts(dims, self.matrix.kronecker(&other.matrix))
    }

    pub fn partial_trace(&self, part: &Bipartition) -> Result<QState> {
        let m = partial_trace(&self.matrix, &self.dims, part)?;
        let dims = part.kept().iter().map(|&k| self.dims[k]).collect();
        Ok(Self::from_parts(dims, m))
    }

    /// Marginal on the listed subsystems.
    pub fn reduced(&self, kept: &[usize]) -> Result<QState> {
        self.partial_trace(&Bipartition::new(kept.to_vec())?)
    }

    pub fn partial_transpose(&self, part: &Bipartition) -> Result<CMat> {
        partial_transpose(&self.matrix, &self.dims, part)
    }

    /// `Tr[rho sigma]`.
    pub fn overlap(&self, other: &QState) -> Result<f64> {
        hs_inner(&self.matrix, &other.matrix)
    }

    pub fn purity(&self) -> f64 {
        // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.matrix)
            .expect("density matrices are Hermitian")
            .values
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("nonempty spectrum")
    }

    /// Number of eigenvalues above `cutoff`.
    pub fn rank(&self, cutoff: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > cutoff).count()
    }

    /// Reorders and merges subsystems into the two-party layout
    /// `[prod dims(S), prod dims(S̄)]`.
    pub fn regroup(&self, part: &Bipartition) -> Result<QState> {
        let n = self.dims.len();
        part.validate_proper(n)?;
        let mut order = part.kept().to_vec();
        order.extend(part.complement(n));
        let m = permute_subsystems(&self.matrix, &self.dims, &order)?;
        let d_s: usize = part.kept().iter().map(|&k| self.dims[k]).product();
        Ok(Self::from_parts(vec![d_s, self.dim() / d_s], m))
    }

    /// `U rho U^dagger` for a unitary `U` on the full space.
    pub fn conjugate_by(&self, u: &CMat) -> Result<QState> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state side is {}",
                u.nrows(),
                u.ncols(),
                self.dim()
            )));
        }
        let m = u * &self.matrix * u.adjoint();
        Ok(Self::from_parts(self.dims.clone(), hermitize(m)))
    }
}

/// Symmetrizes away roundoff: `(M + M^dagger) / 2`.
pub(crate) fn hermitize(m: CMat) -> CMat {
    (&m + m.adjoint()) * c(0.5)
}

/// Normalized state vector with an explicit subsystem layout.
#[derive(Clone, Debug, PartialEq)]
pub struct PureVec {
    dims: Vec<usize>,
    vec: CVec,
}

impl PureVec {
    pub fn new(dims: Vec<usize>, vec: CVec) -> Result<Self> {
        check_dims(&dims)?;
        if vec.len() != product(&dims) {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} does not match dims {:?}",
                vec.len(),
                dims
            )));
        }
        let norm = vec.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("vector norm is {norm}")));
        }
        Ok(Self { dims, vec })
    }

    /// Scales `vec` to unit norm.
    pub fn normalized(dims: Vec<usize>, vec: CVec) -> Result<Self> {
        let norm = vec.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(dims, vec.unscale(norm))
    }

    /// Computational basis state `|digits>`.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        check_dims(&dims)?;
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(i, d)| i >= d) {
            return Err(Error::DimensionMismatch(format!(
                "basis label {digits:?} invalid for dims {dims:?}"
            )));
        }
        let st = strides(&dims);
        let idx: usize = digits.iter().zip(&st).map(|(i, s)| i * s).sum();
        let mut v = CVec::zeros(product(&dims));
        v[idx] = c(1.0);
        Ok(Self { dims, vec: v })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn vec(&self) -> &CVec {
        &self.vec
    }

    pub fn tensor(&self, other: &PureVec) -> PureVec {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureVec {
            dims,
            vec: self.vec.kronecker(&other.vec),
        }
    }

    pub fn projector(&self) -> CMat {
        &self.vec * self.vec.adjoint()
    }

    pub fn to_state(&self) -> QState {
        QState::from_pure(self)
    }

    /// `<self|M|self>`, real part.
    pub fn expectation(&self, m: &CMat) -> f64 {
        (self.vec.adjoint() * m * &self.vec)[(0, 0)].re
    }
}

/// Schmidt form `sum_k sqrt(coeffs[k]) |left_k>|right_k>` of a pure state
/// across a cut. `coeffs` are squared singular values, descending.
#[derive(Clone, Debug)]
pub struct SchmidtDecomp {
    pub coeffs: Vec<f64>,
    pub left_vecs: Vec<CVec>,
    pub right_vecs: Vec<CVec>,
}

impl SchmidtDecomp {
    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    /// Sum of the `r` largest coefficients.
    pub fn top_sum(&self, r: usize) -> f64 {
        self.coeffs.iter().take(r).sum()
    }

    /// Rebuilds the vector in the grouped `S ⊗ S̄` ordering.
    pub fn reconstruct(&self) -> CVec {
        let mut out = CVec::zeros(self.left_vecs[0].len() * self.right_vecs[0].len());
        for ((l, e), f) in self.coeffs.iter().zip(&self.left_vecs).zip(&self.right_vecs) {
            out += e.kronecker(f) * c(l.sqrt());
        }
        out
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` belongs to `values[k]`.
    pub vectors: CMat,
}

pub fn eig_hermitian(m: &CMat) -> Result<Eigen> {
    check_hermitian(m)?;
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitize(m.clone()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Eigen { values, vectors })
}

/// Hilbert-Schmidt inner product `Tr[a^dagger b]`, which equals `Tr[a b]`
/// for Hermitian `a`. Fails if the result has a non-negligible imaginary
/// part.
pub fn hs_inner(a: &CMat, b: &CMat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "inner product of {:?} and {:?} matrices",
            a.shape(),
            b.shape()
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    let scale = (a.norm() * b.norm()).max(1.0);
    if acc.im.abs() > 1e-10 * scale {
        return Err(Error::NotHermitian(acc.im.abs()));
    }
    Ok(acc.re)
}

pub fn partial_trace(m: &CMat, dims: &[usize], part: &Bipartition) -> Result<CMat> {
    check_square_layout(m, dims)?;
    part.validate(dims.len())?;
    let kept = offsets(dims, part.kept());
    let traced = offsets(dims, &part.complement(dims.len()));
    let mut out = CMat::zeros(kept.len(), kept.len());
    for (a, &ka) in kept.iter().enumerate() {
        for (b, &kb) in kept.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &traced {
                acc += m[(ka + t, kb + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Transposes the row/column indices of the subsystems in `part` only.
pub fn partial_transpose(m: &CMat, dims: &[usize], part: &Bipartition) -> Result<CMat> {
    check_square_layout(m, dims)?;
    part.validate(dims.len())?;
    let st = strides(dims);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (mut ii, mut jj) = (i, j);
            for &k in part.kept() {
                let di = (i / st[k]) % dims[k];
                let dj = (j / st[k]) % dims[k];
                ii = ii + dj * st[k] - di * st[k];
                jj = jj + di * st[k] - dj * st[k];
            }
            out[(ii, jj)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// `X ⊗ I` with `X` acting on the subsystems of `part` and the identity on
/// the rest, laid out in the original subsystem order.
pub fn embed_with_identity(x: &CMat, dims: &[usize], part: &Bipartition) -> Result<CMat> {
    part.validate(dims.len())?;
    let kept = offsets(dims, part.kept());
    if x.nrows() != kept.len() || x.ncols() != kept.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator side {} does not match kept dimension {}",
            x.nrows(),
            kept.len()
        )));
    }
    let traced = offsets(dims, &part.complement(dims.len()));
    let n = product(dims);
    let mut out = CMat::zeros(n, n);
    for (a, &ka) in kept.iter().enumerate() {
        for (b, &kb) in kept.iter().enumerate() {
            for &t in &traced {
                out[(ka + t, kb + t)] = x[(a, b)];
            }
        }
    }
    Ok(out)
}

/// Reorders subsystems: new subsystem `k` is old subsystem `order[k]`.
pub fn permute_subsystems(m: &CMat, dims: &[usize], order: &[usize]) -> Result<CMat> {
    check_square_layout(m, dims)?;
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::DimensionMismatch(format!(
            "{order:?} is not a permutation of {} subsystems",
            dims.len()
        )));
    }
    let map = permutation_map(dims, order);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

/// `map[old_index] = new_index` under the subsystem reordering `order`.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let new_st = strides(&new_dims);
    let old_st = strides(dims);
    (0..product(dims))
        .map(|i| {
            order
                .iter()
                .zip(&new_st)
                .map(|(&k, s)| ((i / old_st[k]) % dims[k]) * s)
                .sum()
        })
        .collect()
}

fn check_square_layout(m: &CMat, dims: &[usize]) -> Result<()> {
    let n = product(dims);
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix {:?} does not match dims {:?}",
            m.shape(),
            dims
        )));
    }
    Ok(())
}

pub fn schmidt_decompose(v: &PureVec, part: &Bipartition) -> Result<SchmidtDecomp> {
    schmidt_decompose_with_cutoff(v, part, SCHMIDT_CUTOFF)
}

/// Schmidt decomposition across `S | S̄`. Coefficients at or below `cutoff`
/// are dropped.
pub fn schmidt_decompose_with_cutoff(
    v: &PureVec,
    part: &Bipartition,
    cutoff: f64,
) -> Result<SchmidtDecomp> {
    let n_sub = v.dims.len();
    part.validate_proper(n_sub)?;
    let mut order = part.kept().to_vec();
    order.extend(part.complement(n_sub));
    let map = permutation_map(&v.dims, &order);
    let mut grouped = CVec::zeros(v.vec.len());
    for (i, &j) in map.iter().enumerate() {
        grouped[j] = v.vec[i];
    }
    let rows: usize = part.kept().iter().map(|&k| v.dims[k]).product();
    let cols = v.vec.len() / rows;
    let coeff = CMat::from_fn(rows, cols, |a, b| grouped[a * cols + b]);
    // nalgebra's complex SVD loses accuracy on rank-deficient rectangular
    // inputs, so diagonalize the smaller Gram matrix instead.
    let left_side = rows <= cols;
    let gram = if left_side {
        &coeff * coeff.adjoint()
    } else {
        coeff.adjoint() * &coeff
    };
    let eig = eig_hermitian(&hermitize(gram))?;
    let mut out = SchmidtDecomp {
        coeffs: Vec::new(),
        left_vecs: Vec::new(),
        right_vecs: Vec::new(),
    };
    for k in (0..eig.values.len()).rev() {
        let lambda = eig.values[k];
        if lambda <= cutoff {
            continue;
        }
        let w = eig.vectors.column(k).into_owned();
        let (e, f) = if left_side {
            let f = coeff.transpose() * w.conjugate();
            (w, f.unscale(f.norm()))
        } else {
            let e = &coeff * &w;
            (e.unscale(e.norm()), w.conjugate())
        };
        out.coeffs.push(lambda);
        out.left_vecs.push(e);
        out.right_vecs.push(f);
    }
    Ok(out)
}
