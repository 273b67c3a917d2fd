use nalgebra::{DMatrix, DVector};

use super::{linalg, Operator, Subspace, Tolerance};
use crate::error::{Error, Result};

/// A symmetric positive semidefinite weight with its spectral data cached.
///
/// Eigenvalues below the rank cutoff are kept in `eigvals` but excluded from
/// the square root, the pseudoinverses and the range projector, so that
/// `R(A) = R(A^{1/2})` holds exactly for the stored matrices.
#[derive(Debug, Clone)]
pub struct PsdOperator {
    base: Operator,
    eigvals: Vec<f64>,
    eigvecs: DMatrix<f64>,
    rank: usize,
    sqrt: Operator,
    pinv: Operator,
    sqrt_pinv: Operator,
    range_proj: Operator,
    tol: Tolerance,
}

impl PsdOperator {
    pub fn new(a: &Operator, tol: &Tolerance) -> Result<Self> {
        let m = a.as_matrix();
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "weight must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let asym = (m - m.transpose()).norm();
        if asym > tol.eq_abs() * (1.0 + m.norm()) {
            return Err(Error::NotSymmetric(asym));
        }
        let base = linalg::symmetrize(m);
        let (mut eigvals, eigvecs) = linalg::sym_eigen(&base);
        if let Some(&lowest) = eigvals.last() {
            if lowest < -tol.psd_neg() {
                return Err(Error::NotPsd(lowest));
            }
        }
        for v in eigvals.iter_mut() {
            *v = v.max(0.0);
        }
        let top = eigvals.first().copied().unwrap_or(0.0);
        let rank = linalg::rank_from_sigma(&eigvals, tol.cutoff(top));

        let n = base.nrows();
        let mut sqrt = DMatrix::zeros(n, n);
        let mut pinv = DMatrix::zeros(n, n);
        let mut sqrt_pinv = DMatrix::zeros(n, n);
        let mut range_proj = DMatrix::zeros(n, n);
        for (v, &lam) in eigvecs.column_iter().zip(&eigvals).take(rank) {
            let outer = v * v.transpose();
            sqrt += &outer * lam.sqrt();
            pinv += &outer / lam;
            sqrt_pinv += &outer / lam.sqrt();
            range_proj += outer;
        }
        Ok(Self {
            base: Operator::wrap(base),
            eigvals,
            eigvecs,
            rank,
            sqrt: Operator::wrap(sqrt),
            pinv: Operator::wrap(pinv),
            sqrt_pinv: Operator::wrap(sqrt_pinv),
            range_proj: Operator::wrap(range_proj),
            tol: *tol,
        })
    }

    /// The weight `TᵀT` induced by a factor `T`.
    pub fn from_factor(t: &Operator, tol: &Tolerance) -> Result<Self> {
        let m = t.as_matrix();
        Self::new(&Operator::wrap(m.transpose() * m), tol)
    }

    pub fn dim(&self) -> usize {
        self.base.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_invertible(&self) -> bool {
        self.rank == self.dim()
    }

    pub fn base(&self) -> &Operator {
        &self.base
    }

    /// Eigenvalues in descending order, negatives clipped to zero.
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn eigvecs(&self) -> &DMatrix<f64> {
        &self.eigvecs
    }

    pub fn sqrt(&self) -> &Operator {
        &self.sqrt
    }

    pub fn pinv(&self) -> &Operator {
        &self.pinv
    }

    pub fn sqrt_pinv(&self) -> &Operator {
        &self.sqrt_pinv
    }

    /// Orthogonal projector onto `R(A)`.
    pub fn range_proj(&self) -> &Operator {
        &self.range_proj
    }

    /// Tolerance the spectral data was computed with.
    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    /// Spectral norm `‖A‖ = λ_max`.
    pub fn norm(&self) -> f64 {
        self.eigvals.first().copied().unwrap_or(0.0)
    }

    /// `R(A)`.
    pub fn range(&self) -> Subspace {
        Subspace {
            basis: self.eigvecs.columns(0, self.rank).into_owned(),
        }
    }

    /// `N(A)`.
    pub fn null_space(&self) -> Subspace {
        Subspace {
            basis: self
                .eigvecs
                .columns(self.rank, self.dim() - self.rank)
                .into_owned(),
        }
    }

    /// `⟨Ax, x⟩`, unclipped.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(self.base.as_matrix() * x))
    }

    pub(crate) fn mat(&self) -> &DMatrix<f64> {
        self.base.as_matrix()
    }

    pub(crate) fn same_weight(&self, other: &PsdOperator) -> bool {
        std::ptr::eq(self, other) || self.base == other.base
    }
}
