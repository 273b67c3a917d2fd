//! Oracles shared by the integration suites. They use only elementary
//! arithmetic (Gram–Schmidt, Jacobi rotations, bisection, grid scans) and
//! never call the library's SVD or eigen routines.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use oblique_core::sampling::{random_subspace, random_subspace_meeting_null, random_weight};
use oblique_core::{PsdOperator, Subspace, Tolerance};
use rand::Rng;

/// Orthonormal basis for the span of the columns, by modified Gram–Schmidt
/// with one re-orthogonalization pass. A column is dropped when its residual
/// falls below `drop`.
pub fn orth(m: &DMatrix<f64>, drop: f64) -> DMatrix<f64> {
    let n = m.nrows();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for q in &cols {
                let c = q.dot(&v);
                v -= q * c;
            }
        }
        let norm = v.norm();
        if norm > drop {
            cols.push(v / norm);
        }
    }
    let mut out = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Orthonormal basis of the complement of an orthonormal basis `b`.
pub fn complement(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    let k = b.ncols();
    let mut joined = DMatrix::zeros(n, k + n);
    joined.columns_mut(0, k).copy_from(b);
    joined.columns_mut(k, n).copy_from(&DMatrix::identity(n, n));
    let full = orth(&joined, 1e-6);
    full.columns(k, full.ncols() - k).into_owned()
}

/// `{x : m x = 0}`, where `m` has entries at scale `scale`.
pub fn null_space(m: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    complement(&orth(&m.transpose(), 1e-7 * scale.max(1e-300)))
}

pub fn proj(b: &DMatrix<f64>) -> DMatrix<f64> {
    b * b.transpose()
}

pub fn same_space(b1: &DMatrix<f64>, b2: &DMatrix<f64>, eps: f64) -> bool {
    b1.ncols() == b2.ncols() && (proj(b1) - proj(b2)).norm() <= eps
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; eigenvalues
/// descending with matching eigenvector columns.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 * (1.0 + a.norm_squared()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (vals, vecs)
}

/// Largest singular value from the Jacobi eigenvalues of `MᵀM`.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    jacobi_eigen(&(m.transpose() * m)).0[0].max(0.0).sqrt()
}

/// `inf{λ : λAAᵀ − BBᵀ ⪰ 0}` by bisection on the smallest Jacobi eigenvalue.
pub fn pencil_lambda(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let aa = a * a.transpose();
    let bb = b * b.transpose();
    let scale = 1.0 + aa.norm() + bb.norm();
    let psd = |lam: f64| {
        let m = &aa * lam - &bb;
        let m = (&m + m.transpose()) * 0.5;
        *jacobi_eigen(&m).0.last().unwrap() >= -1e-11 * scale * (1.0 + lam)
    };
    let mut hi = 1.0;
    while !psd(hi) {
        hi *= 2.0;
        assert!(hi < 1e12, "pencil never becomes semidefinite");
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psd(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    hi
}

/// Minimum of a convex function on `[lo, hi]`: scan 41 points, keep the two
/// cells around the best one, repeat.
pub fn zoom_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const POINTS: usize = 41;
    let mut best = (f64::INFINITY, lo);
    for _ in 0..40 {
        let h = (hi - lo) / (POINTS - 1) as f64;
        let mut idx = 0;
        best = (f64::INFINITY, lo);
        for i in 0..POINTS {
            let t = lo + h * i as f64;
            let v = f(t);
            if v < best.0 {
                best = (v, t);
                idx = i;
            }
        }
        let new_lo = lo + h * idx.saturating_sub(1) as f64;
        let new_hi = lo + h * (idx + 1).min(POINTS - 1) as f64;
        lo = new_lo;
        hi = new_hi;
        if hi - lo < 1e-11 * (1.0 + best.1.abs()) {
            break;
        }
    }
    best
}

/// Minimum of a convex function of `d ∈ {1, 2}` variables over the box
/// `[-r, r]^d`, nesting [`zoom_min`] (partial minima of convex functions
/// are convex).
pub fn grid_min(f: &dyn Fn(&[f64]) -> f64, d: usize, r: f64) -> f64 {
    match d {
        0 => f(&[]),
        1 => zoom_min(&|t| f(&[t]), -r, r).0,
        2 => zoom_min(&|s| zoom_min(&|t| f(&[s, t]), -r, r).0, -r, r).0,
        _ => panic!("grid scan supports at most two dimensions"),
    }
}

/// A random pair `(A, S)` with `n ∈ [2, 8]`, any rank and any dimension of
/// `S`; half the time `S` is built to meet `N(A)`.
pub fn random_pair<R: Rng>(rng: &mut R, tol: &Tolerance) -> (PsdOperator, Subspace) {
    let n = rng.random_range(2..=8usize);
    let r = rng.random_range(0..=n);
    let k = rng.random_range(0..=n);
    let a = random_weight(rng, n, r, tol);
    let s = if rng.random_bool(0.5) {
        random_subspace(rng, n, k)
    } else {
        let overlap = rng.random_range(1..=k.max(1));
        random_subspace_meeting_null(rng, &a, k, overlap)
    };
    (a, s)
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    oblique_core::sampling::random_vector(rng, n)
        .into_matrix()
        .column(0)
        .into_owned()
}

/// `A^{-1}(S^⊥) ⊖ (S ∩ N(A))` assembled from oracle pieces.
pub fn pas_nullspace_oracle(a: &DMatrix<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
    let scale = 1.0 + a.norm();
    let pre = null_space(&(s.transpose() * a), scale);
    let null_a = null_space(a, scale);
    let n = intersection(s, &null_a);
    let residual = &pre - proj(&n) * &pre;
    orth(&residual, 1e-6)
}

/// `S1 ∩ S2` for orthonormal bases: null space of `[B1 | −B2]`, mapped back.
pub fn intersection(b1: &DMatrix<f64>, b2: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b1.nrows();
    let (k1, k2) = (b1.ncols(), b2.ncols());
    if k1 == 0 || k2 == 0 {
        return DMatrix::zeros(n, 0);
    }
    let mut joined = DMatrix::zeros(n, k1 + k2);
    joined.columns_mut(0, k1).copy_from(b1);
    joined.columns_mut(k1, k2).copy_from(&(-b2));
    let coeffs = null_space(&joined, 1.0);
    orth(&(b1 * coeffs.rows(0, k1)), 1e-6)
}
