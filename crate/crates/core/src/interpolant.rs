//! Minimal-seminorm interpolation: minimize `|x + s|_A` over `s ∈ S`, with
//! `A = TᵀT`. The minimizer of least Euclidean norm is `(I − P_{A,S}) x`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kernel::{linalg, Operator, PsdOperator, Subspace, Tolerance};
use crate::oblique;

/// `|x|_A = ⟨Ax, x⟩^{1/2}`. Slightly negative forms (above `−psd_neg`) are
/// read as zero.
pub fn seminorm(a: &PsdOperator, x: &DVector<f64>) -> Result<f64> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a weight on R^{}",
            x.len(),
            a.dim()
        )));
    }
    let q = a.quadratic_form(x);
    if q < -a.tolerance().psd_neg() {
        return Err(Error::NotPsd(q));
    }
    Ok(q.max(0.0).sqrt())
}

/// Result of a seminorm interpolation. The full optimal set is
/// `minimizer + N`, with `N = S ∩ N(A)`.
#[derive(Debug, Clone)]
pub struct SplineResult {
    minimizer: DVector<f64>,
    value: f64,
    unique: bool,
    degenerate: Subspace,
}

impl SplineResult {
    /// `(I − P_{A,S}) x`.
    pub fn minimizer(&self) -> &DVector<f64> {
        &self.minimizer
    }

    /// `|minimizer|_A`, the optimal value.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Whether the optimal set is a single point, i.e. `S ∩ N(A) = {0}`.
    pub fn unique(&self) -> bool {
        self.unique
    }

    /// Direction space `N` of the optimal set.
    pub fn solution_directions(&self) -> &Subspace {
        &self.degenerate
    }

    /// The optimal point `minimizer + B_N c`.
    pub fn solution_at(&self, c: &DVector<f64>) -> Result<DVector<f64>> {
        if c.len() != self.degenerate.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a {}-dimensional solution set",
                c.len(),
                self.degenerate.dim()
            )));
        }
        Ok(&self.minimizer + self.degenerate.basis_matrix() * c)
    }

    /// The optimal set is never empty in finite dimension, since every pair
    /// is compatible.
    pub fn nonempty(&self) -> bool {
        true
    }
}

fn check_inputs(t: &Operator, s: &Subspace, x: &DVector<f64>) -> Result<()> {
    let n = t.cols();
    if s.ambient_dim() != n || x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "factor has {n} columns, subspace lives in R^{}, x has length {}",
            s.ambient_dim(),
            x.len()
        )));
    }
    Ok(())
}

/// Minimizes `‖T(x + s)‖` over `s ∈ S` through `P_{A,S}` with `A = TᵀT`.
pub fn spline(
    t: &Operator,
    s: &Subspace,
    x: &DVector<f64>,
    tol: &Tolerance,
) -> Result<SplineResult> {
    check_inputs(t, s, x)?;
    let a = PsdOperator::from_factor(t, tol)?;
    solve(&a, s, x, tol)
}

/// [`spline`] for a weight given directly, with `T = A^{1/2}`.
pub fn spline_from_weight(
    a: &PsdOperator,
    s: &Subspace,
    x: &DVector<f64>,
    tol: &Tolerance,
) -> Result<SplineResult> {
    check_inputs(a.sqrt(), s, x)?;
    solve(a, s, x, tol)
}

fn solve(a: &PsdOperator, s: &Subspace, x: &DVector<f64>, tol: &Tolerance) -> Result<SplineResult> {
    let p = oblique::pas(a, s, tol)?;
    let minimizer = x - p.matrix().as_matrix() * x;
    let value = seminorm(a, &minimizer)?;
    let degenerate = oblique::degenerate_part(a, s, tol)?;
    Ok(SplineResult {
        minimizer,
        value,
        unique: degenerate.is_zero(),
        degenerate,
    })
}

/// Independent minimizer by least squares in coordinates of `S`: the
/// minimal-norm solution `c` of `min ‖T x + T B_S c‖`, then the optimal point
/// of least Euclidean norm on the resulting affine set.
pub fn spline_oracle(
    t: &Operator,
    s: &Subspace,
    x: &DVector<f64>,
    tol: &Tolerance,
) -> Result<DVector<f64>> {
    check_inputs(t, s, x)?;
    let tm = t.as_matrix();
    let bs = s.basis_matrix();
    let tb = tm * bs;
    // A = TᵀT cuts eigenvalues at rank_rel·‖A‖; the matching cut on
    // singular values of T is √rank_rel·‖T‖.
    let cutoff = tol.rank_rel().sqrt() * linalg::spectral_norm(tm);
    let c = -linalg::pinv(&tb, cutoff) * (tm * x);
    let z = x + bs * c;
    // Optimal points are z + B_S k with T B_S k = 0; remove the component of
    // z along that direction space.
    let free = bs * linalg::null_space(&tb, cutoff);
    Ok(&z - &free * (free.transpose() * &z))
}
