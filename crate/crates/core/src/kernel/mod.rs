//! Numerical substrate: operators, subspaces, rank decisions,
//! pseudoinverses and the subspace algebra used by every other module.
//!
//! Subspaces are always held as orthonormal bases. Rank decisions use an
//! absolute cutoff `rank_rel * scale`; the public [`numerical_rank`] takes the
//! scale from the matrix itself, while the subspace constructors that apply an
//! operator (`image`, [`preimage`], `null_space_of`) take it from the operator
//! norm so that numerically-zero products are recognised as zero.

pub(crate) mod linalg;
mod psd;

pub use psd::PsdOperator;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thresholds used for rank decisions and equality tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    rank_rel: f64,
    eq_abs: f64,
    psd_neg: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            eq_abs: 1e-8,
            psd_neg: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, eq_abs: f64, psd_neg: f64) -> Result<Self> {
        for (name, v) in [
            ("rank_rel", rank_rel),
            ("eq_abs", eq_abs),
            ("psd_neg", psd_neg),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} = {v} must lie in (0, 1)"
                )));
            }
        }
        Ok(Self {
            rank_rel,
            eq_abs,
            psd_neg,
        })
    }

    pub fn with_rank_rel(self, rank_rel: f64) -> Result<Self> {
        Self::new(rank_rel, self.eq_abs, self.psd_neg)
    }

    pub fn with_eq_abs(self, eq_abs: f64) -> Result<Self> {
        Self::new(self.rank_rel, eq_abs, self.psd_neg)
    }

    /// Relative singular-value cutoff.
    pub fn rank_rel(&self) -> f64 {
        self.rank_rel
    }

    /// Absolute threshold for matrix and vector equality.
    pub fn eq_abs(&self) -> f64 {
        self.eq_abs
    }

    /// Negative eigenvalues above `-psd_neg` are clipped to zero.
    pub fn psd_neg(&self) -> f64 {
        self.psd_neg
    }

    pub(crate) fn cutoff(&self, scale: f64) -> f64 {
        self.rank_rel * scale
    }
}

/// A dense real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    m: DMatrix<f64>,
}

impl Operator {
    /// Builds an operator from row-major entries.
    pub fn new(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { m })
    }

    pub(crate) fn wrap(m: DMatrix<f64>) -> Self {
        debug_assert!(m.iter().all(|x| x.is_finite()));
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::wrap(DMatrix::zeros(rows, cols))
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    /// A single-column operator.
    pub fn column(entries: &[f64]) -> Result<Self> {
        Self::new(entries.len(), 1, entries)
    }

    pub fn rows(&self) -> usize {
        self.m.nrows()
    }

    pub fn cols(&self) -> usize {
        self.m.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.m[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m.len());
        for r in 0..self.rows() {
            out.extend(self.m.row(r).iter());
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::wrap(self.m.transpose())
    }

    pub fn matmul(&self, rhs: &Operator) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self::wrap(&self.m * &rhs.m))
    }

    pub fn spectral_norm(&self) -> f64 {
        linalg::spectral_norm(&self.m)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Frobenius distance at most `eq_abs`.
    pub fn approx_eq(&self, other: &Operator, tol: &Tolerance) -> bool {
        self.m.shape() == other.m.shape() && (&self.m - &other.m).norm() <= tol.eq_abs
    }
}

impl From<Operator> for DMatrix<f64> {
    fn from(op: Operator) -> Self {
        op.m
    }
}

/// A subspace of R^n stored as an orthonormal basis (n x k).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Self {
            basis: DMatrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            basis: DMatrix::identity(n, n),
        }
    }

    /// Span of the columns of `vectors`, see [`subspace_from_span`].
    pub fn span(vectors: &Operator, tol: &Tolerance) -> Self {
        subspace_from_span(vectors, tol)
    }

    /// Span of the columns, discarding directions whose singular value falls
    /// below `rank_rel * scale`.
    pub(crate) fn span_scaled(vectors: &DMatrix<f64>, scale: f64, tol: &Tolerance) -> Self {
        Self {
            basis: linalg::column_space(vectors, tol.cutoff(scale)),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> Operator {
        Operator::wrap(self.basis.clone())
    }

    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projector `B Bᵀ`.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Frobenius distance between the orthogonal projectors.
    pub fn distance(&self, other: &Subspace) -> f64 {
        (self.projector() - other.projector()).norm()
    }

    /// `other ⊆ self` within `eq_abs * n`.
    pub fn contains(&self, other: &Subspace, tol: &Tolerance) -> bool {
        if other.is_zero() {
            return true;
        }
        let resid = &other.basis - &self.basis * (self.basis.transpose() * &other.basis);
        resid.norm() <= tol.eq_abs * self.ambient_dim().max(1) as f64
    }

    pub fn contains_vector(&self, v: &DVector<f64>, tol: &Tolerance) -> bool {
        let resid = v - &self.basis * (self.basis.transpose() * v);
        resid.norm() <= tol.eq_abs * (1.0 + v.norm())
    }

    /// Mutual containment, tested as `‖P1 − P2‖_F ≤ eq_abs * n`.
    pub fn equals(&self, other: &Subspace, tol: &Tolerance) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.dim() == other.dim()
            && self.distance(other) <= tol.eq_abs * self.ambient_dim().max(1) as f64
    }
}

/// An idempotent operator together with its range and nullspace.
#[derive(Debug, Clone, PartialEq)]
pub struct ObliqueProjection {
    matrix: Operator,
    range: Subspace,
    nullspace: Subspace,
}

impl ObliqueProjection {
    pub(crate) fn from_parts(matrix: DMatrix<f64>, range: Subspace, nullspace: Subspace) -> Self {
        Self {
            matrix: Operator::wrap(matrix),
            range,
            nullspace,
        }
    }

    /// Wraps an arbitrary square matrix, reading off its range and nullspace.
    /// Fails with `NotIdempotent` when `‖Q² − Q‖_F > eq_abs (1 + ‖Q‖_F)`.
    pub fn from_matrix(q: &Operator, tol: &Tolerance) -> Result<Self> {
        if q.rows() != q.cols() {
            return Err(Error::DimensionMismatch(format!(
                "projection must be square, got {}x{}",
                q.rows(),
                q.cols()
            )));
        }
        let m = q.as_matrix();
        let defect = (m * m - m).norm();
        if defect > tol.eq_abs * (1.0 + m.norm()) {
            return Err(Error::NotIdempotent(defect));
        }
        // Nonzero singular values of a projection are at least one.
        let scale = linalg::spectral_norm(m).max(1.0);
        let range = Subspace::span_scaled(m, scale, tol);
        let nullspace = null_space_of(m, scale, tol);
        Ok(Self::from_parts(m.clone(), range, nullspace))
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn range(&self) -> &Subspace {
        &self.range
    }

    pub fn nullspace(&self) -> &Subspace {
        &self.nullspace
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `‖Q² − Q‖_F`.
    pub fn idempotency_defect(&self) -> f64 {
        let m = self.matrix.as_matrix();
        (m * m - m).norm()
    }
}

/// Number of singular values `σ` with `σ ≥ rank_rel · σ_max` (and `σ > 0`).
pub fn numerical_rank(m: &Operator, tol: &Tolerance) -> usize {
    let sigma = linalg::svd(m.as_matrix()).sigma;
    let smax = sigma.first().copied().unwrap_or(0.0);
    linalg::rank_from_sigma(&sigma, tol.cutoff(smax))
}

/// Orthonormalized span of the columns of `vectors`.
pub fn subspace_from_span(vectors: &Operator, tol: &Tolerance) -> Subspace {
    let m = vectors.as_matrix();
    let smax = linalg::spectral_norm(m);
    Subspace::span_scaled(m, smax, tol)
}

/// Orthogonal complement `S^⊥`.
pub fn complement(s: &Subspace) -> Subspace {
    let n = s.ambient_dim();
    if s.is_zero() {
        return Subspace::full(n);
    }
    Subspace {
        basis: linalg::null_space(&s.basis.transpose(), 0.5),
    }
}

/// `S1 + S2`.
pub fn sum(s1: &Subspace, s2: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    same_ambient(s1, s2)?;
    let n = s1.ambient_dim();
    let mut joined = DMatrix::zeros(n, s1.dim() + s2.dim());
    joined.columns_mut(0, s1.dim()).copy_from(&s1.basis);
    joined.columns_mut(s1.dim(), s2.dim()).copy_from(&s2.basis);
    let smax = linalg::spectral_norm(&joined);
    Ok(Subspace::span_scaled(&joined, smax, tol))
}

/// `S1 ∩ S2`, computed as `(S1^⊥ + S2^⊥)^⊥`.
pub fn intersect(s1: &Subspace, s2: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    same_ambient(s1, s2)?;
    Ok(complement(&sum(&complement(s1), &complement(s2), tol)?))
}

/// `S ⊖ N = S ∩ N^⊥`; requires `N ⊆ S`.
pub fn subtract(s: &Subspace, n: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    same_ambient(s, n)?;
    if !s.contains(n, tol) {
        return Err(Error::NotContained);
    }
    if n.is_zero() {
        return Ok(s.clone());
    }
    let residual = &s.basis - &n.basis * (n.basis.transpose() * &s.basis);
    Ok(Subspace {
        basis: linalg::column_space(&residual, 0.5),
    })
}

/// `W^{-1}(S) = {x : Wx ∈ S}`, the nullspace of `P_{S^⊥} W`.
pub fn preimage(w: &Operator, s: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    let wm = w.as_matrix();
    if wm.nrows() != wm.ncols() || wm.nrows() != s.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "preimage needs a square operator on R^{}, got {}x{}",
            s.ambient_dim(),
            wm.nrows(),
            wm.ncols()
        )));
    }
    let comp = complement(s);
    let scale = linalg::spectral_norm(wm);
    Ok(null_space_of(&(comp.basis.transpose() * wm), scale, tol))
}

/// Orthogonal projector onto `S`.
pub fn ortho_projector(s: &Subspace) -> ObliqueProjection {
    ObliqueProjection::from_parts(s.projector(), s.clone(), complement(s))
}

/// Moore–Penrose pseudoinverse with singular values below `rank_rel · σ_max`
/// treated as zero.
pub fn moore_penrose(w: &Operator, tol: &Tolerance) -> Operator {
    let m = w.as_matrix();
    let smax = linalg::spectral_norm(m);
    Operator::wrap(linalg::pinv(m, tol.cutoff(smax)))
}

/// Cosine of the Friedrichs angle: the largest principal cosine between
/// `S1 ⊖ (S1∩S2)` and `S2 ⊖ (S1∩S2)`, zero when either part is trivial.
pub fn friedrichs_angle(s1: &Subspace, s2: &Subspace, tol: &Tolerance) -> Result<f64> {
    let common = intersect(s1, s2, tol)?;
    let r1 = subtract(s1, &common, tol)?;
    let r2 = subtract(s2, &common, tol)?;
    if r1.is_zero() || r2.is_zero() {
        return Ok(0.0);
    }
    let cos = linalg::spectral_norm(&(r1.basis.transpose() * &r2.basis));
    Ok(cos.clamp(0.0, 1.0))
}

/// Nullspace of an arbitrary matrix, rank decided against `rank_rel * scale`.
pub(crate) fn null_space_of(m: &DMatrix<f64>, scale: f64, tol: &Tolerance) -> Subspace {
    Subspace {
        basis: linalg::null_space(m, tol.cutoff(scale)),
    }
}

/// Nullspace of `W` with rank decided against `‖W‖`.
pub fn nullspace(w: &Operator, tol: &Tolerance) -> Subspace {
    let m = w.as_matrix();
    null_space_of(m, linalg::spectral_norm(m), tol)
}

/// Range of `W` with rank decided against `‖W‖`.
pub fn range(w: &Operator, tol: &Tolerance) -> Subspace {
    subspace_from_span(w, tol)
}

/// `W(S)`, with rank decided against `‖W‖` rather than `‖W B_S‖`.
pub fn image(w: &Operator, s: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    let wm = w.as_matrix();
    if wm.ncols() != s.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator with {} columns applied to a subspace of R^{}",
            wm.ncols(),
            s.ambient_dim()
        )));
    }
    let scale = linalg::spectral_norm(wm);
    Ok(Subspace::span_scaled(&(wm * &s.basis), scale, tol))
}

fn same_ambient(s1: &Subspace, s2: &Subspace) -> Result<()> {
    if s1.ambient_dim() != s2.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspaces of R^{} and R^{}",
            s1.ambient_dim(),
            s2.ambient_dim()
        )));
    }
    Ok(())
}
