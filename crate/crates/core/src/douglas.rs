//! The operator equation `AX = B`: range inclusion, the reduced solution
//! `D = A^†B` and the least `λ` with `BBᵀ ≤ λ AAᵀ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{linalg, Operator, Tolerance};

/// The unique solution `D` of `AX = B` with `R(D) ⊆ R(Aᵀ)` and `N(D) = N(B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    d: Operator,
    norm_sq: f64,
    residual: f64,
}

impl ReducedSolution {
    pub fn solution(&self) -> &Operator {
        &self.d
    }

    /// Squared spectral norm `‖D‖²`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `‖AD − B‖_F`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn into_solution(self) -> Operator {
        self.d
    }
}

fn check_rows(a: &Operator, b: &Operator) -> Result<()> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    Ok(())
}

/// `‖(I − AA^†)B‖_F` with `A^†` cut at `rank_rel · scale`.
fn inclusion_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, cutoff: f64) -> (DMatrix<f64>, f64) {
    let a_pinv = linalg::pinv(a, cutoff);
    let d = &a_pinv * b;
    let resid = (b - a * &d).norm();
    (d, resid)
}

/// Whether `R(B) ⊆ R(A)`: `‖(I − AA^†)B‖_F ≤ eq_abs · ‖B‖_F`.
pub fn range_inclusion(b: &Operator, a: &Operator, tol: &Tolerance) -> Result<bool> {
    check_rows(a, b)?;
    let am = a.as_matrix();
    let bm = b.as_matrix();
    let (_, resid) = inclusion_residual(am, bm, tol.cutoff(linalg::spectral_norm(am)));
    Ok(resid <= tol.eq_abs() * bm.norm())
}

/// Reduced solution `D = A^†B`. Fails with `NoSolution` unless `R(B) ⊆ R(A)`;
/// near-feasible systems are rejected rather than solved in the least-squares
/// sense (see [`least_squares`] for that).
pub fn reduced_solution(a: &Operator, b: &Operator, tol: &Tolerance) -> Result<ReducedSolution> {
    check_rows(a, b)?;
    let am = a.as_matrix();
    let bm = b.as_matrix();
    let (d, resid) = inclusion_residual(am, bm, tol.cutoff(linalg::spectral_norm(am)));
    if resid > tol.eq_abs() * bm.norm() {
        return Err(Error::NoSolution(resid));
    }
    Ok(package(d, resid))
}

/// `A^†B` without the feasibility gate. Not a solution of `AX = B` unless the
/// range inclusion holds; the residual says how far off it is.
pub fn least_squares(a: &Operator, b: &Operator, tol: &Tolerance) -> Result<ReducedSolution> {
    check_rows(a, b)?;
    let am = a.as_matrix();
    let (d, resid) = inclusion_residual(am, b.as_matrix(), tol.cutoff(linalg::spectral_norm(am)));
    Ok(package(d, resid))
}

fn package(d: DMatrix<f64>, residual: f64) -> ReducedSolution {
    let norm = linalg::spectral_norm(&d);
    ReducedSolution {
        d: Operator::wrap(d),
        norm_sq: norm * norm,
        residual,
    }
}

/// `inf{λ : λAAᵀ − BBᵀ ⪰ 0}`, read off as the top eigenvalue of `DDᵀ` for the
/// reduced solution `D`.
pub fn minimal_lambda(a: &Operator, b: &Operator, tol: &Tolerance) -> Result<f64> {
    let sol = reduced_solution(a, b, tol)?;
    let d = sol.d.as_matrix();
    let (vals, _) = linalg::sym_eigen(&(d * d.transpose()));
    Ok(vals.first().copied().unwrap_or(0.0).max(0.0))
}

/// Douglas step for blocks of a larger weight: ranks and the feasibility
/// threshold are measured against `scale` (the norm of the whole weight)
/// instead of the blocks themselves, so numerically-zero blocks stay zero.
pub(crate) fn reduced_solution_scaled(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    scale: f64,
    tol: &Tolerance,
) -> std::result::Result<DMatrix<f64>, f64> {
    let (d, resid) = inclusion_residual(a, b, tol.cutoff(scale));
    if resid > tol.eq_abs() * scale {
        Err(resid)
    } else {
        Ok(d)
    }
}
