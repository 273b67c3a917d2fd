//! The range `R(A^{1/2})` as a Hilbert space with `⟨A^{1/2}x, A^{1/2}y⟩ =
//! ⟨P x, P y⟩`, `P` the projection onto `N(A)^⊥`.
//!
//! Vectors are represented in the witness chart: `u ↦ w = (A^{1/2})^† u`,
//! an isometry onto `R(A)` with its Euclidean inner product. Operators on the
//! range become `n × n` matrices acting on witnesses.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::kernel::{
    complement, image, intersect, linalg, sum, Operator, PsdOperator, Subspace, Tolerance,
};
use crate::oblique;

/// A vector of `R(A^{1/2})` together with its minimal-norm preimage.
#[derive(Debug, Clone)]
pub struct RangeVector<'a> {
    weight: &'a PsdOperator,
    ambient: DVector<f64>,
    witness: DVector<f64>,
    half_residual: f64,
}

impl<'a> RangeVector<'a> {
    pub fn weight(&self) -> &'a PsdOperator {
        self.weight
    }

    pub fn ambient(&self) -> &DVector<f64> {
        &self.ambient
    }

    /// `(A^{1/2})^† u`, the preimage of least Euclidean norm.
    pub fn witness(&self) -> &DVector<f64> {
        &self.witness
    }

    /// `‖A^{1/2} w − u‖`, the membership residual against `R(A^{1/2})`.
    /// Kept apart from the `R(A)` test that [`lift`] gates on.
    pub fn half_residual(&self) -> f64 {
        self.half_residual
    }

    /// `‖u‖_{A^{1/2}}`.
    pub fn norm(&self) -> f64 {
        self.witness.norm()
    }
}

fn check_len(a: &PsdOperator, len: usize) -> Result<()> {
    if len != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {len} for a weight on R^{}",
            a.dim()
        )));
    }
    Ok(())
}

/// Places `u` in `R(A^{1/2})`, or fails with the distance of `u` from `R(A)`.
pub fn lift<'a>(a: &'a PsdOperator, u: &DVector<f64>, tol: &Tolerance) -> Result<RangeVector<'a>> {
    check_len(a, u.len())?;
    let outside = u - a.range_proj().as_matrix() * u;
    let resid = outside.norm();
    if resid > tol.eq_abs() * (1.0 + u.norm()) {
        return Err(Error::NotInRange(resid));
    }
    let witness = a.sqrt_pinv().as_matrix() * u;
    let half_residual = (a.sqrt().as_matrix() * &witness - u).norm();
    Ok(RangeVector {
        weight: a,
        ambient: u.clone(),
        witness,
        half_residual,
    })
}

/// The range vector `A^{1/2} x`, whose witness is `P_{R(A)} x`.
pub fn lift_preimage<'a>(a: &'a PsdOperator, x: &DVector<f64>) -> Result<RangeVector<'a>> {
    check_len(a, x.len())?;
    let witness = a.range_proj().as_matrix() * x;
    let ambient = a.sqrt().as_matrix() * x;
    Ok(RangeVector {
        weight: a,
        ambient,
        witness,
        half_residual: 0.0,
    })
}

/// `⟨x, y⟩_{A^{1/2}}`.
pub fn range_inner(x: &RangeVector<'_>, y: &RangeVector<'_>) -> Result<f64> {
    if !x.weight.same_weight(y.weight) {
        return Err(Error::WeightMismatch);
    }
    Ok(x.witness.dot(&y.witness))
}

/// Orthogonal projection `Q_{A,S}` of the range space onto the closure of
/// `A(S)`, held in witness coordinates.
#[derive(Debug, Clone)]
pub struct RangeSpaceProjection<'a> {
    weight: &'a PsdOperator,
    target: Subspace,
    coord_matrix: Operator,
    range_image: Subspace,
    null_image: Subspace,
}

impl<'a> RangeSpaceProjection<'a> {
    pub fn weight(&self) -> &'a PsdOperator {
        self.weight
    }

    pub fn target(&self) -> &Subspace {
        &self.target
    }

    /// The projection in witness coordinates; symmetric and idempotent.
    pub fn coord_matrix(&self) -> &Operator {
        &self.coord_matrix
    }

    /// `A^{1/2}(S)`, the chart image of `A(S)`.
    pub fn range_image(&self) -> &Subspace {
        &self.range_image
    }

    /// `A^{1/2}(S)^⊥ ∩ R(A)`, the chart image of `S^⊥ ∩ R(A)`.
    pub fn null_image(&self) -> &Subspace {
        &self.null_image
    }

    /// `A^{1/2} C (A^{1/2})^†`: the projection acting on ambient coordinates
    /// of `R(A^{1/2})` (zero on `N(A)`).
    pub fn ambient_matrix(&self) -> Operator {
        let a = self.weight;
        Operator::wrap(
            a.sqrt().as_matrix() * self.coord_matrix.as_matrix() * a.sqrt_pinv().as_matrix(),
        )
    }

    pub fn apply(&self, v: &RangeVector<'_>) -> Result<RangeVector<'a>> {
        if !self.weight.same_weight(v.weight) {
            return Err(Error::WeightMismatch);
        }
        let witness = self.coord_matrix.as_matrix() * &v.witness;
        let ambient = self.weight.sqrt().as_matrix() * &witness;
        Ok(RangeVector {
            weight: self.weight,
            ambient,
            witness,
            half_residual: 0.0,
        })
    }
}

fn check_dims(a: &PsdOperator, s: &Subspace) -> Result<()> {
    if a.dim() != s.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "weight acts on R^{} but subspace lives in R^{}",
            a.dim(),
            s.ambient_dim()
        )));
    }
    Ok(())
}

/// Chart image `(A^{1/2})^†(V)` of a subspace of `R(A)`.
fn chart(a: &PsdOperator, v: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    image(a.sqrt_pinv(), v, tol)
}

/// Builds `Q_{A,S}`. Defined for every pair, compatible or not.
pub fn qas<'a>(
    a: &'a PsdOperator,
    s: &Subspace,
    tol: &Tolerance,
) -> Result<RangeSpaceProjection<'a>> {
    check_dims(a, s)?;
    let range_image = image(a.sqrt(), s, tol)?;
    let null_image = intersect(&complement(&range_image), &a.range(), tol)?;
    Ok(RangeSpaceProjection {
        weight: a,
        target: s.clone(),
        coord_matrix: Operator::wrap(range_image.projector()),
        range_image,
        null_image,
    })
}

/// The extension `B̃` of an operator `B` to the range space, `B̃A = AB`.
#[derive(Debug, Clone)]
pub struct Extension {
    chart: Operator,
    null_leak: f64,
    bounded: bool,
}

impl Extension {
    /// `A^{1/2} B (A^{1/2})^†` in witness coordinates.
    pub fn chart(&self) -> &Operator {
        &self.chart
    }

    /// `‖P_{R(A)} B B_{N(A)}‖_F`, how far `B` moves `N(A)` out of itself.
    pub fn null_leak(&self) -> f64 {
        self.null_leak
    }

    /// Whether `R(Bᵀ A^{1/2}) ⊆ R(A^{1/2})` passed.
    pub fn bounded(&self) -> bool {
        self.bounded
    }
}

/// Extends `B` to `R(A^{1/2})`; requires `B(N(A)) ⊆ N(A)`.
pub fn theta(a: &PsdOperator, b: &Operator, tol: &Tolerance) -> Result<Extension> {
    let bm = b.as_matrix();
    if bm.nrows() != a.dim() || bm.ncols() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, weight acts on R^{}",
            bm.nrows(),
            bm.ncols(),
            a.dim()
        )));
    }
    let null_leak = (a.range_proj().as_matrix() * bm * a.null_space().basis_matrix()).norm();
    let bnorm = linalg::spectral_norm(bm);
    if null_leak > tol.eq_abs() * (1.0 + bnorm) {
        return Err(Error::NotExtendable(null_leak));
    }
    let sqrt = a.sqrt().as_matrix();
    let adj = bm.transpose() * sqrt;
    let outside = &adj - a.range_proj().as_matrix() * &adj;
    let bounded = outside.norm() <= tol.eq_abs() * (1.0 + adj.norm());
    Ok(Extension {
        chart: Operator::wrap(sqrt * bm * a.sqrt_pinv().as_matrix()),
        null_leak,
        bounded,
    })
}

/// `θ(P_{A,S}) = Q_{A,S}`, compared in the chart within `10·eq_abs`.
pub fn theta_pas_identity(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<bool> {
    let p = oblique::pas(a, s, tol)?;
    let ext = theta(a, p.matrix(), tol)?;
    let q = qas(a, s, tol)?;
    let gap = (ext.chart.as_matrix() - q.coord_matrix.as_matrix()).norm();
    Ok(gap <= 10.0 * tol.eq_abs())
}

/// `Q_{A,S}(R(A))` in ambient coordinates, and whether it equals `A(S)`.
pub fn qas_range_image(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<(Subspace, bool)> {
    let q = qas(a, s, tol)?;
    let amb = q.ambient_matrix();
    let img = image(&amb, &a.range(), tol)?;
    let a_s = image(a.base(), s, tol)?;
    let equal = img.equals(&a_s, tol);
    Ok((img, equal))
}

/// `A^♯ Q_{A,S} A`, with `A^♯` realized by the pseudoinverse.
pub fn sharp_projection(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<Operator> {
    let q = qas(a, s, tol)?;
    let amb = q.ambient_matrix();
    Ok(Operator::wrap(
        a.pinv().as_matrix() * amb.as_matrix() * a.mat(),
    ))
}

/// `A(S) + S^⊥∩R(A)` is all of the range space, checked together with the
/// equivalent statement that `S^⊥∩R(A)` fills the orthogonal complement of
/// `A(S)` there. Both are chart-subspace equalities.
pub fn dense_sum_check(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<bool> {
    check_dims(a, s)?;
    let range_a = a.range();
    let a_s = image(a.base(), s, tol)?;
    let perp_part = intersect(&complement(s), &range_a, tol)?;
    let chart_a_s = chart(a, &a_s, tol)?;
    let chart_perp = chart(a, &perp_part, tol)?;

    let fills = sum(&chart_a_s, &chart_perp, tol)?.equals(&range_a, tol);
    let m_perp = intersect(&complement(&chart_a_s), &range_a, tol)?;
    let complement_matches = chart_perp.equals(&m_perp, tol);
    if fills != complement_matches {
        return Err(Error::IdentityDisagreement("dense sum vs complement"));
    }
    Ok(fills)
}

/// The three equivalent characterizations of compatibility through the
/// range space:
/// compatibility itself;
/// `A^{1/2}(S) + (A^{1/2}(S)^⊥ ∩ R(A^{1/2})) = R(A^{1/2})`;
/// `R(A)` splits along `M` and its range-space complement, with
/// `M ∩ R(A) = A(S)`.
pub fn compatibility_characterizations(
    a: &PsdOperator,
    s: &Subspace,
    tol: &Tolerance,
) -> Result<(bool, bool, bool)> {
    check_dims(a, s)?;
    let compatible = oblique::is_compatible(a, s, tol)?;

    let half = image(a.sqrt(), s, tol)?;
    let range_half = crate::kernel::range(a.sqrt(), tol);
    let t = intersect(&complement(&half), &range_half, tol)?;
    let second = sum(&half, &t, tol)?.equals(&range_half, tol);

    // In the chart, M is A^{1/2}(S), R(A) is itself, and the range-space
    // complement of M is the Euclidean one intersected with R(A).
    let range_a = a.range();
    let m_in_range = intersect(&half, &range_a, tol)?;
    let m_perp = intersect(&complement(&half), &range_a, tol)?;
    let splits = sum(&m_in_range, &m_perp, tol)?.equals(&range_a, tol);
    let a_s = chart(a, &image(a.base(), s, tol)?, tol)?;
    let third = splits && m_in_range.equals(&a_s, tol);

    Ok((compatible, second, third))
}
