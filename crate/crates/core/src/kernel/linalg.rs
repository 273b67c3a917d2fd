//! Dense building blocks shared by the kernel: sorted SVD, cutoff-based
//! column and null spaces, pseudoinverses and symmetric eigensolves.
//!
//! Every rank decision funnels through [`rank_from_sigma`]: a singular value
//! counts when it is strictly positive and not below the absolute cutoff.

use nalgebra::DMatrix;

pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD with singular values in descending order.
pub(crate) fn svd(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = m.shape();
    let p = rows.min(cols);
    if p == 0 {
        return Svd {
            u: DMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            v: DMatrix::zeros(cols, 0),
        };
    }
    let dec = to_faer(m)
        .thin_svd()
        .expect("SVD converges on finite input");
    let (u, s, v) = (dec.U(), dec.S(), dec.V());
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let sigma = order.iter().map(|&i| s[i]).collect();
    let u = DMatrix::from_fn(rows, p, |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(cols, p, |r, c| v[(r, order[c])]);
    Svd { u, sigma, v }
}

pub(crate) fn rank_from_sigma(sigma: &[f64], cutoff: f64) -> usize {
    sigma.iter().filter(|&&s| s > 0.0 && s >= cutoff).count()
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    svd(m).sigma.first().copied().unwrap_or(0.0)
}

/// Flips each column so that its entry of largest magnitude is positive.
/// Pins down the sign freedom of SVD and eigen bases.
pub(crate) fn canonicalize_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0.0_f64;
        let mut sign = 1.0;
        for &x in col.iter() {
            if x.abs() > best + 1e-12 {
                best = x.abs();
                sign = x.signum();
            }
        }
        if sign < 0.0 {
            col.neg_mut();
        }
    }
}

/// Orthonormal basis of the column space, keeping singular values at or
/// above `cutoff`.
pub(crate) fn column_space(m: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let dec = svd(m);
    let r = rank_from_sigma(&dec.sigma, cutoff);
    let mut basis = dec.u.columns(0, r).into_owned();
    canonicalize_signs(&mut basis);
    basis
}

/// Orthonormal basis of the null space, complementary to the row space
/// selected by `cutoff`.
pub(crate) fn null_space(m: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    let dec = to_faer(m).svd().expect("SVD converges on finite input");
    let (s, v) = (dec.S(), dec.V());
    let p = rows.min(cols);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let r = rank_from_sigma(&sigma, cutoff);
    // Columns of the full V beyond the retained singular directions.
    let keep: Vec<usize> = order[r..].iter().copied().chain(p..cols).collect();
    let mut basis = DMatrix::from_fn(cols, keep.len(), |i, c| v[(i, keep[c])]);
    canonicalize_signs(&mut basis);
    basis
}

pub(crate) fn pinv(m: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let dec = svd(m);
    let r = rank_from_sigma(&dec.sigma, cutoff);
    let mut out = DMatrix::zeros(cols, rows);
    for i in 0..r {
        let v = dec.v.column(i);
        let u = dec.u.column(i);
        out += (v * u.transpose()) / dec.sigma[i];
    }
    out
}

/// Symmetric eigendecomposition with eigenvalues in descending order and
/// sign-canonical eigenvectors.
pub(crate) fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let dec = to_faer(m)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigensolver converges on finite input");
    let (s, u) = (dec.S(), dec.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let vals = order.iter().map(|&i| s[i]).collect();
    let mut vecs = DMatrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    canonicalize_signs(&mut vecs);
    (vals, vecs)
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
