//! Seeded random instances for property checks. Every generator takes the
//! caller's RNG so that a single seed reproduces a whole battery.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::kernel::{Operator, PsdOperator, Subspace, Tolerance};

/// An `rows × cols` matrix with independent standard normal entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Operator {
    let m = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    Operator::wrap(m)
}

/// A random `n × n` orthogonal matrix (QR of a Gaussian matrix with the sign
/// of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let g = random_matrix(rng, n, n).into_matrix();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `Q diag(λ) Qᵀ` with `rank` eigenvalues drawn log-uniformly from `[0.1, 10]`
/// and the rest exactly zero, so the numerical rank is unambiguous.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> Operator {
    let rank = rank.min(n);
    let q = random_orthogonal(rng, n);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..rank {
        let lam = 10f64.powf(rng.random_range(-1.0..=1.0));
        let v = q.column(i);
        m += v * v.transpose() * lam;
    }
    Operator::wrap((&m + m.transpose()) * 0.5)
}

/// An `rows × cols` matrix of the given rank with nonzero singular values
/// drawn log-uniformly from `[0.3, 3]`.
pub fn random_factor<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    rank: usize,
) -> Operator {
    let rank = rank.min(rows).min(cols);
    let u = random_orthogonal(rng, rows);
    let v = random_orthogonal(rng, cols);
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rank {
        let sigma = 10f64.powf(rng.random_range(-0.5..=0.5));
        m += u.column(i) * v.column(i).transpose() * sigma;
    }
    Operator::wrap(m)
}

/// [`random_psd`] wrapped as a [`PsdOperator`].
pub fn random_weight<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    rank: usize,
    tol: &Tolerance,
) -> PsdOperator {
    PsdOperator::new(&random_psd(rng, n, rank), tol).expect("generated weight is PSD")
}

/// A uniformly distributed `dim`-dimensional subspace of `R^n`.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, n: usize, dim: usize) -> Subspace {
    let dim = dim.min(n);
    let q = random_orthogonal(rng, n);
    Subspace::span(
        &Operator::wrap(q.columns(0, dim).into_owned()),
        &Tolerance::default(),
    )
}

/// A subspace of dimension `dim` that meets `N(A)` in at least `overlap`
/// dimensions: `overlap` directions are taken from the null space and the
/// rest are generic.
pub fn random_subspace_meeting_null<R: Rng + ?Sized>(
    rng: &mut R,
    a: &PsdOperator,
    dim: usize,
    overlap: usize,
) -> Subspace {
    let n = a.dim();
    let dim = dim.min(n);
    let null = a.null_space();
    let overlap = overlap.min(null.dim()).min(dim);
    let mix = random_orthogonal(rng, null.dim());
    let from_null = null.basis_matrix() * mix.columns(0, overlap);
    let generic = random_matrix(rng, n, dim - overlap).into_matrix();
    let mut cols = DMatrix::zeros(n, dim);
    cols.columns_mut(0, overlap).copy_from(&from_null);
    cols.columns_mut(overlap, dim - overlap).copy_from(&generic);
    Subspace::span(&Operator::wrap(cols), &Tolerance::default())
}

/// A random vector as an `n × 1` operator.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Operator {
    random_matrix(rng, n, 1)
}
