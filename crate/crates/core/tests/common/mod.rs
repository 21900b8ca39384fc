//! Independent reference implementations used to cross-check the library:
//! a textbook cyclic Jacobi eigensolver and the estimator recursion written
//! in full vertex-space form. Both are deliberately simple and slow.

use graphlms::nalgebra::{DMatrix, DVector};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order together with the matching
/// orthonormal eigenvector columns. Converges to machine precision for the
/// small matrices used in tests.
pub fn jacobi_eigen(mat: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = mat.nrows();
    assert_eq!(n, mat.ncols(), "jacobi oracle needs a square matrix");
    let mut a = mat.clone();
    let mut v = DMatrix::<f64>::identity(n, n);

    let off_diag = |a: &DMatrix<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[(i, j)] * a[(i, j)];
            }
        }
        s.sqrt()
    };

    for _sweep in 0..100 {
        if off_diag(&a) < 1e-14 * (1.0 + a.norm()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                // Classic 2x2 rotation annihilating a[(p, q)].
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
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
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    (eigenvalues, vectors)
}

/// One update of the estimator written without the reduced coordinates:
/// `x <- x + mu * B D (y - x)` with explicit n-by-n projector matrices.
pub fn full_form_step(
    x: &DVector<f64>,
    band_projector: &DMatrix<f64>,
    sample_mask: &[bool],
    y: &DVector<f64>,
    mu: f64,
) -> DVector<f64> {
    let mut residual = y - x;
    for (i, &keep) in sample_mask.iter().enumerate() {
        if !keep {
            residual[i] = 0.0;
        }
    }
    x + mu * (band_projector * residual)
}
