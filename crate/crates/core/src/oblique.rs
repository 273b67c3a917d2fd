//! The pair `(A, S)`: block decomposition of `A` along `S ⊕ S^⊥`,
//! compatibility, the distinguished A-Hermitian projection `P_{A,S}` by three
//! independent constructions, Krein's criterion, the affine family of
//! A-Hermitian projections with range `S`, and the closedness diagnostics.

use nalgebra::DMatrix;

use crate::douglas;
use crate::error::{Error, Result};
use crate::kernel::{
    self, complement, friedrichs_angle, image, intersect, linalg, preimage, subtract, sum,
    ObliqueProjection, Operator, PsdOperator, Subspace, Tolerance,
};

/// The matrix of `A` in the orthonormal frame `(B_S, B_{S^⊥})`:
/// `[[a, b], [bᵀ, c]]`.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    a: Operator,
    b: Operator,
    c: Operator,
    s: Subspace,
    s_perp: Subspace,
}

impl BlockDecomposition {
    /// `S → S` block.
    pub fn a(&self) -> &Operator {
        &self.a
    }

    /// `S^⊥ → S` block.
    pub fn b(&self) -> &Operator {
        &self.b
    }

    /// `S^⊥ → S^⊥` block.
    pub fn c(&self) -> &Operator {
        &self.c
    }

    pub fn frame(&self) -> (&Subspace, &Subspace) {
        (&self.s, &self.s_perp)
    }

    /// `A` rebuilt from the blocks and the frame.
    pub fn reassemble(&self) -> Operator {
        let bs = self.s.basis_matrix();
        let bp = self.s_perp.basis_matrix();
        let (a, b, c) = (self.a.as_matrix(), self.b.as_matrix(), self.c.as_matrix());
        let m = bs * a * bs.transpose()
            + bs * b * bp.transpose()
            + bp * b.transpose() * bs.transpose()
            + bp * c * bp.transpose();
        Operator::wrap(m)
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

pub fn block_decompose(a: &PsdOperator, s: &Subspace) -> Result<BlockDecomposition> {
    check_dims(a, s)?;
    let s_perp = complement(s);
    let bs = s.basis_matrix();
    let bp = s_perp.basis_matrix();
    let am = a.mat();
    let a_blk = linalg::symmetrize(&(bs.transpose() * am * bs));
    let b_blk = bs.transpose() * am * bp;
    let c_blk = linalg::symmetrize(&(bp.transpose() * am * bp));
    Ok(BlockDecomposition {
        a: Operator::wrap(a_blk),
        b: Operator::wrap(b_blk),
        c: Operator::wrap(c_blk),
        s: s.clone(),
        s_perp,
    })
}

/// Solves `aX = b` for the block decomposition; `Err(residual)` when the
/// range inclusion fails. Also fails (with an infinite residual) when the
/// weight, cut to its numerical range, does not resolve exactly
/// `dim S − dim N` directions of `S`: the solution would then describe a
/// projection whose nullspace disagrees with `A^{-1}(S^⊥) ⊖ N`.
fn douglas_step(
    blocks: &BlockDecomposition,
    a: &PsdOperator,
    tol: &Tolerance,
) -> std::result::Result<DMatrix<f64>, f64> {
    let d = douglas::reduced_solution_scaled(
        blocks.a.as_matrix(),
        blocks.b.as_matrix(),
        a.norm(),
        tol,
    )?;
    let s = &blocks.s;
    let n_dim = degenerate_part(a, s, tol).map_err(|_| f64::INFINITY)?.dim();
    if resolved_rank(a, s, tol) != s.dim() - n_dim {
        return Err(f64::INFINITY);
    }
    Ok(d)
}

/// `X = U_Rᵀ B_S` with `U_R` the kept eigenvectors of `A`, and the kept
/// eigenvalues divided by `‖A‖`.
fn range_coordinates(a: &PsdOperator, s: &Subspace) -> (DMatrix<f64>, Vec<f64>) {
    let rank = a.rank();
    let x = a.eigvecs().columns(0, rank).transpose() * s.basis_matrix();
    let top = a.norm();
    let lam = a.eigvals()[..rank].iter().map(|l| l / top).collect();
    (x, lam)
}

/// Rank of `B_Sᵀ Ã B_S` at the working cutoff, `Ã` the weight cut to its
/// numerical range.
fn resolved_rank(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> usize {
    let (x, lam) = range_coordinates(a, s);
    let mut dx = x.clone();
    for (i, &l) in lam.iter().enumerate() {
        dx.row_mut(i).scale_mut(l);
    }
    let gram = linalg::symmetrize(&(x.transpose() * dx));
    let (vals, _) = linalg::sym_eigen(&gram);
    linalg::rank_from_sigma(&vals, tol.rank_rel())
}

/// Whether some projection with range `S` is A-Hermitian, decided by the
/// range inclusion `R(b) ⊆ R(a)`.
pub fn is_compatible(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<bool> {
    let blocks = block_decompose(a, s)?;
    Ok(douglas_step(&blocks, a, tol).is_ok())
}

/// The direct form of compatibility: `S + A^{-1}(S^⊥) = R^n`.
pub fn sum_covers_space(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<bool> {
    check_dims(a, s)?;
    let pre = preimage(a.base(), &complement(s), tol)?;
    Ok(sum(s, &pre, tol)?.dim() == a.dim())
}

/// `N = S ∩ N(A)`.
pub fn degenerate_part(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    check_dims(a, s)?;
    intersect(s, &a.null_space(), tol)
}

/// `A^{-1}(S^⊥) ⊖ N`, the nullspace of `P_{A,S}`.
pub fn pas_nullspace(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<Subspace> {
    check_dims(a, s)?;
    let pre = preimage(a.base(), &complement(s), tol)?;
    // N ⊆ A^{-1}(S^⊥) exactly, but the two are resolved by different rank
    // decisions; coarse tolerances can leave N a hair outside.
    let n = intersect(&pre, &degenerate_part(a, s, tol)?, tol)?;
    subtract(&pre, &n, tol)
}

/// `P_{A,S}` assembled as `B_S [I | d] [B_S | B_{S^⊥}]ᵀ` with `d` the reduced
/// solution of `aX = b`.
pub fn pas(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<ObliqueProjection> {
    let blocks = block_decompose(a, s)?;
    let d = douglas_step(&blocks, a, tol).map_err(|_| Error::Incompatible)?;
    let bs = s.basis_matrix();
    let bp = blocks.s_perp.basis_matrix();
    let m = bs * bs.transpose() + bs * d * bp.transpose();
    let nullspace = pas_nullspace(a, s, tol)?;
    Ok(ObliqueProjection::from_parts(m, s.clone(), nullspace))
}

/// The reduced solution `d` of `aX = b`, in frame coordinates.
pub fn block_solution(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<Operator> {
    let blocks = block_decompose(a, s)?;
    douglas_step(&blocks, a, tol)
        .map(Operator::wrap)
        .map_err(|_| Error::Incompatible)
}

fn read_off(m: DMatrix<f64>, s: &Subspace, tol: &Tolerance) -> ObliqueProjection {
    let scale = linalg::spectral_norm(&m).max(1.0);
    let nullspace = kernel::null_space_of(&m, scale, tol);
    ObliqueProjection::from_parts(m, s.clone(), nullspace)
}

/// `P (PAP + (I−P)A(I−P))^{-1} A` for invertible `A`.
pub fn pas_invertible(a: &PsdOperator, s: &Subspace) -> Result<ObliqueProjection> {
    check_dims(a, s)?;
    if !a.is_invertible() {
        return Err(Error::Singular {
            rank: a.rank(),
            dim: a.dim(),
        });
    }
    let n = a.dim();
    let p = s.projector();
    let q = DMatrix::identity(n, n) - &p;
    let am = a.mat();
    let pinched = &p * am * &p + &q * am * &q;
    let inv = pinched.try_inverse().ok_or(Error::Singular {
        rank: a.rank(),
        dim: n,
    })?;
    let m = &p * inv * am;
    Ok(read_off(m, s, a.tolerance()))
}

/// `(PAP)^† PA + P_N`.
pub fn pas_closed_range(a: &PsdOperator, s: &Subspace) -> Result<ObliqueProjection> {
    check_dims(a, s)?;
    let tol = a.tolerance();
    let q = closed_range_part(a, s, tol);
    let n = degenerate_part(a, s, tol)?;
    Ok(read_off(q + n.projector(), s, tol))
}

/// `(PAP)^† PA`, the projection onto `S ⊖ N` along `A^{-1}(S^⊥)`.
pub fn closed_range_part(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> DMatrix<f64> {
    let p = s.projector();
    let am = a.mat();
    let pap = linalg::symmetrize(&(&p * am * &p));
    linalg::pinv(&pap, tol.cutoff(a.norm())) * &p * am
}

/// Reduced solution of `(A^{1/2}P) X = P_M A^{1/2}` with `M = A^{1/2}(S)`.
/// Agrees with [`closed_range_part`] whenever the pair is compatible.
pub fn sqrt_reduced_solution(a: &PsdOperator, s: &Subspace, tol: &Tolerance) -> Result<Operator> {
    check_dims(a, s)?;
    let sqrt = a.sqrt().as_matrix();
    let m = image(a.sqrt(), s, tol)?;
    let lhs = sqrt * s.projector();
    let rhs = m.projector() * sqrt;
    douglas::reduced_solution_scaled(&lhs, &rhs, a.norm().sqrt(), tol)
        .map(Operator::wrap)
        .map_err(|_| Error::Incompatible)
}

/// Both forms of the A-Hermitian test for a projection with range `S`:
/// `(AQ = QᵀA, N(Q) ⊆ A^{-1}(S^⊥))`.
pub fn krein_verdicts(
    q: &ObliqueProjection,
    a: &PsdOperator,
    s: &Subspace,
) -> Result<(bool, bool)> {
    check_dims(a, s)?;
    let tol = a.tolerance();
    if q.dim() != a.dim() || !q.range().equals(s, tol) {
        return Err(Error::RangeMismatch);
    }
    let am = a.mat();
    let qm = q.matrix().as_matrix();
    let bound = tol.eq_abs() * (1.0 + a.norm());
    let algebraic = (am * qm - qm.transpose() * am).norm() <= bound;
    let leak = s.basis_matrix().transpose() * am * q.nullspace().basis_matrix();
    let containment = leak.norm() <= bound;
    Ok((algebraic, containment))
}

/// Whether `Q` (with range `S`) is A-Hermitian. Both the algebraic identity
/// and the nullspace containment are evaluated; a disagreement is reported as
/// `KreinDisagreement`.
pub fn krein_check(q: &ObliqueProjection, a: &PsdOperator, s: &Subspace) -> Result<bool> {
    let (algebraic, containment) = krein_verdicts(q, a, s)?;
    if algebraic != containment {
        return Err(Error::KreinDisagreement);
    }
    Ok(algebraic)
}

/// `P_{A,S} + B_N T B_{S^⊥}ᵀ` for `T` given in `(S^⊥ → N)` coordinates,
/// a `dim N × dim S^⊥` matrix.
pub fn family_member(a: &PsdOperator, s: &Subspace, t: &Operator) -> Result<ObliqueProjection> {
    let tol = a.tolerance();
    let base = pas(a, s, tol)?;
    let n = degenerate_part(a, s, tol)?;
    let s_perp = complement(s);
    if t.rows() != n.dim() || t.cols() != s_perp.dim() {
        return Err(Error::DimensionMismatch(format!(
            "T must be {}x{} (dim N x dim S^perp), got {}x{}",
            n.dim(),
            s_perp.dim(),
            t.rows(),
            t.cols()
        )));
    }
    let m = base.matrix().as_matrix()
        + n.basis_matrix() * t.as_matrix() * s_perp.basis_matrix().transpose();
    Ok(read_off(m, s, tol))
}

/// Everything known about the pair `(A, S)`.
#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    pub compatible: bool,
    /// `S + A^{-1}(S^⊥) = R^n`.
    pub sum_check: bool,
    /// `N = S ∩ N(A)`.
    pub degenerate: Subspace,
    /// `A^{-1}(S^⊥)`.
    pub preimage_perp: Subspace,
    /// Reduced solution of `aX = b`, absent when incompatible.
    pub d: Option<Operator>,
    pub pas: Option<ObliqueProjection>,
    /// Closedness chain, in order:
    /// compatible; `A(S)` closed in `R(A)`; `A^{-1}(A(S)) = S + N(A)`;
    /// `A^{1/2}(S)` closed in `R(A^{1/2})`; `S + N(A)` closed;
    /// `P_{R(A)}(S)` closed.
    pub chain: [bool; 6],
    /// Compatibility of `(A, S)`, `(A, P_{R(A)}(S))` and
    /// `(A, P_{R(A)}(S) + N(A))`, which share the same projection onto `R(A)`.
    pub range_projection_compat: [bool; 3],
    /// Cosine of the Friedrichs angle between `S^⊥` and `A(S)`.
    pub angle_cosine: f64,
}

impl CompatibilityReport {
    /// Checks `1→2→4→5`, `2↔3` and `5↔6` on the chain flags.
    pub fn implications_respected(&self) -> bool {
        let c = &self.chain;
        let imp = |p: bool, q: bool| !p || q;
        imp(c[0], c[1]) && imp(c[1], c[3]) && imp(c[3], c[4]) && c[1] == c[2] && c[4] == c[5]
    }

    pub fn all_flags(&self) -> bool {
        self.chain.iter().all(|&f| f)
    }
}

/// Reduced minimum moduli of `A`, `A^{1/2}` and `P_{R(A)}` on `S ⊖ N`,
/// normalized by the operator norms: the `(dim S − dim N)`-th singular value
/// of each restricted to `S`. Zero when that many directions do not exist.
fn closedness_moduli(a: &PsdOperator, s: &Subspace, n_dim: usize) -> [f64; 3] {
    let r = s.dim().saturating_sub(n_dim);
    if r == 0 {
        return [1.0; 3];
    }
    if a.rank() < r {
        return [0.0; 3];
    }
    let (x, lam) = range_coordinates(a, s);
    let scaled = |power: f64| {
        let mut m = x.clone();
        for (i, &l) in lam.iter().enumerate() {
            m.row_mut(i).scale_mut(l.powf(power));
        }
        linalg::svd(&m).sigma.get(r - 1).copied().unwrap_or(0.0)
    };
    [scaled(1.0), scaled(0.5), scaled(0.0)]
}

/// Evaluates compatibility, the distinguished projection, and the closedness
/// chain. In finite dimension every flag is true in exact arithmetic; a false
/// flag means the tolerance cannot resolve the geometry of the input.
pub fn diagnostics_chain(
    a: &PsdOperator,
    s: &Subspace,
    tol: &Tolerance,
) -> Result<CompatibilityReport> {
    check_dims(a, s)?;
    let blocks = block_decompose(a, s)?;
    let d = douglas_step(&blocks, a, tol).ok();
    let compatible = d.is_some();
    let sum_check = sum_covers_space(a, s, tol)?;
    let degenerate = degenerate_part(a, s, tol)?;
    let preimage_perp = preimage(a.base(), &complement(s), tol)?;
    let pas = if compatible {
        Some(pas(a, s, tol)?)
    } else {
        None
    };

    let null_a = a.null_space();
    let a_s = image(a.base(), s, tol)?;
    let projected = image(a.range_proj(), s, tol)?;

    // Each closedness condition holds numerically when the matching reduced
    // minimum modulus on S ⊖ N is resolvable. The moduli are ordered
    // q_A ≤ q_{A^{1/2}} ≤ q_P, and A(S) / A^{-1}(A(S)) and S+N(A) / P(S)
    // share theirs.
    let [q_a, q_half, q_p] = closedness_moduli(a, s, degenerate.dim());
    let resolved = |q: f64| q >= tol.rank_rel();
    let closed_in_range = resolved(q_a);
    let preimage_matches = resolved(q_a);
    let half_closed = resolved(q_half);
    let sum_closed = resolved(q_p);
    let projection_closed = resolved(q_p);

    let widened = sum(&projected, &null_a, tol)?;
    let range_projection_compat = [
        compatible,
        is_compatible(a, &projected, tol)?,
        is_compatible(a, &widened, tol)?,
    ];
    let angle_cosine = friedrichs_angle(&complement(s), &a_s, tol)?;

    Ok(CompatibilityReport {
        compatible,
        sum_check,
        degenerate,
        preimage_perp,
        d: d.map(Operator::wrap),
        pas,
        chain: [
            compatible,
            closed_in_range,
            preimage_matches,
            half_closed,
            sum_closed,
            projection_closed,
        ],
        range_projection_compat,
        angle_cosine,
    })
}

#[cfg(test)]
mod tests;
