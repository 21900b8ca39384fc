//! Internal dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric eigendecomposition with a canonical ordering.
pub(crate) struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: DVector<f64>,
    /// Matching eigenvectors as columns, each with its largest-magnitude
    /// entry made positive (ties broken by lowest index).
    pub vectors: DMatrix<f64>,
}

/// Diagonalises a symmetric matrix deterministically.
///
/// Eigenpairs are sorted by ascending eigenvalue (stable for repeated
/// eigenvalues) and each eigenvector's sign is fixed, so identical inputs
/// yield bit-identical outputs.
pub(crate) fn sym_eigen(m: &DMatrix<f64>) -> Result<SymEigen> {
    let n = m.nrows();
    let eig = nalgebra::linalg::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or(Error::EigenSolverFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalue comparison")
    });

    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        values[col] = eig.eigenvalues[src];
        let mut v = eig.eigenvectors.column(src).clone_owned();
        canonical_sign(&mut v);
        vectors.set_column(col, &v);
    }
    Ok(SymEigen { values, vectors })
}

/// Eigenvalues only, ascending. Cheaper than [`sym_eigen`] when the
/// eigenvectors are not needed.
pub(crate) fn sym_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalue comparison"));
    DVector::from_vec(vals)
}

fn canonical_sign(v: &mut DVector<f64>) {
    let mut best = 0usize;
    let mut best_abs = -1.0f64;
    for (i, x) in v.iter().enumerate() {
        let a = x.abs();
        if a > best_abs {
            best_abs = a;
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Column-major vectorisation, `vec(M)`.
pub(crate) fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Largest eigenvalue of a symmetric matrix.
pub(crate) fn lambda_max_sym(m: &DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}
