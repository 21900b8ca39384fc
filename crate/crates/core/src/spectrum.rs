//! Laplacian eigendecomposition and the graph Fourier transform.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSignal};
use crate::linalg;

/// Orthonormal Laplacian eigenbasis with ascending eigenvalues.
///
/// Column `i` of the basis is the eigenvector for `eigenvalues[i]`; the first
/// eigenvalue of a valid Laplacian is zero (up to round-off). Analysis along
/// the basis (`basisᵀ x`) is the graph Fourier transform; low indices are
/// smooth modes.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    basis: DMatrix<f64>,
}

const ORTHONORMALITY_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-8;
const NEGATIVE_CLAMP_TOL: f64 = 1e-10;

impl Spectrum {
    /// Diagonalises the Laplacian of `graph`.
    ///
    /// The result is deterministic: eigenvalues ascend (stable under ties)
    /// and each eigenvector's largest-magnitude entry is positive. Returns an
    /// error when the solver fails to meet the orthonormality or
    /// reconstruction tolerances.
    pub fn decompose(graph: &Graph) -> Result<Self> {
        let l = graph.laplacian();
        let eig = linalg::sym_eigen(&l)?;
        let mut eigenvalues = eig.values;
        let basis = eig.vectors;

        let scale = eigenvalues
            .iter()
            .fold(1.0f64, |acc, &v| acc.max(v.abs()));
        for v in eigenvalues.iter_mut() {
            if *v < 0.0 {
                if *v < -NEGATIVE_CLAMP_TOL * scale {
                    return Err(Error::EigenSolverFailure);
                }
                *v = 0.0;
            }
        }

        let n = l.nrows();
        let gram = basis.transpose() * &basis;
        if (gram - DMatrix::identity(n, n)).amax() > ORTHONORMALITY_TOL {
            return Err(Error::EigenSolverFailure);
        }
        let rec = &basis * DMatrix::from_diagonal(&eigenvalues) * basis.transpose();
        if (rec - l).amax() > RECONSTRUCTION_TOL {
            return Err(Error::EigenSolverFailure);
        }

        Ok(Self { eigenvalues, basis })
    }

    /// Number of vertices (and of frequencies).
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Eigenvalue `i`.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    /// Full orthonormal eigenbasis, one eigenvector per column.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Eigenvector for frequency `i`.
    pub fn basis_column(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).clone_owned()
    }

    /// Columns of the basis selected by `indices` (ascending), as an
    /// `n x indices.len()` matrix.
    pub fn sub_basis(&self, indices: &[usize]) -> DMatrix<f64> {
        let n = self.n();
        let mut out = DMatrix::zeros(n, indices.len());
        for (col, &i) in indices.iter().enumerate() {
            out.set_column(col, &self.basis.column(i));
        }
        out
    }

    /// Graph Fourier transform `basisᵀ x`.
    pub fn gft(&self, signal: &GraphSignal) -> Result<DVector<f64>> {
        if signal.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: signal.len(),
            });
        }
        Ok(self.basis.transpose() * signal.as_vector())
    }

    /// Inverse transform `basis s`.
    pub fn inverse_gft(&self, coeffs: &DVector<f64>) -> Result<GraphSignal> {
        if coeffs.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: coeffs.len(),
            });
        }
        Ok(GraphSignal::new(&self.basis * coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_node_spectrum() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let s = Spectrum::decompose(&g).unwrap();
        assert_abs_diff_eq!(s.eigenvalue(0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalue(1), 2.0, epsilon = 1e-12);
        let r = 1.0 / 2.0f64.sqrt();
        assert_abs_diff_eq!(s.basis_column(0)[0], r, epsilon = 1e-12);
        assert_abs_diff_eq!(s.basis_column(0)[1], r, epsilon = 1e-12);
    }

    #[test]
    fn triangle_spectrum() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        let s = Spectrum::decompose(&g).unwrap();
        assert_abs_diff_eq!(s.eigenvalue(0), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.eigenvalue(1), 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.eigenvalue(2), 3.0, epsilon = 1e-10);
    }

    #[test]
    fn transform_round_trip_and_energy() {
        let g = Graph::from_edges(
            5,
            &[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (3, 4, 1.0), (0, 4, 0.3)],
        )
        .unwrap();
        let s = Spectrum::decompose(&g).unwrap();
        let x = GraphSignal::from_vec(vec![1.0, -2.0, 0.5, 3.0, -1.0]);
        let coeffs = s.gft(&x).unwrap();
        let back = s.inverse_gft(&coeffs).unwrap();
        assert!((back.as_vector() - x.as_vector()).amax() < 1e-12);
        assert_abs_diff_eq!(coeffs.norm(), x.norm(), epsilon = 1e-12);
    }

    #[test]
    fn decompose_is_bit_deterministic() {
        let g = Graph::from_edges(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])
            .unwrap();
        let a = Spectrum::decompose(&g).unwrap();
        let b = Spectrum::decompose(&g).unwrap();
        for i in 0..4 {
            assert_eq!(a.eigenvalue(i).to_bits(), b.eigenvalue(i).to_bits());
            for j in 0..4 {
                assert_eq!(a.basis()[(i, j)].to_bits(), b.basis()[(i, j)].to_bits());
            }
        }
    }

    #[test]
    fn rejects_wrong_length() {
        let g = Graph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let s = Spectrum::decompose(&g).unwrap();
        assert!(s.gft(&GraphSignal::zeros(3)).is_err());
        assert!(s.inverse_gft(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn sub_basis_selects_columns() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = Spectrum::decompose(&g).unwrap();
        let u = s.sub_basis(&[0, 2]);
        assert_eq!(u.ncols(), 2);
        assert_eq!(u.column(0), s.basis().column(0));
        assert_eq!(u.column(1), s.basis().column(2));
    }
}
