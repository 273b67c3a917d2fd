//! Independent oracles for unit tests. Nothing here calls into the SVD or
//! eigen routines used by the library.

use nalgebra::DMatrix;

/// Cyclic Jacobi eigenvalues of a symmetric matrix, descending.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

/// Singular values from the Jacobi eigenvalues of `MᵀM`, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    jacobi_eigenvalues(&(m.transpose() * m))
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect()
}

pub fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

pub fn assert_close(a: &DMatrix<f64>, b: &DMatrix<f64>, eps: f64) {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    let d = (a - b).norm();
    assert!(d <= eps, "matrices differ by {d:e}\nleft: {a}\nright: {b}");
}
