//! Vertex- and band-limiting projection operators.
//!
//! A sampling set `S` induces the diagonal projector `D` that zeroes a
//! signal outside `S`; a frequency set `F` induces the projector
//! `B = U_F U_Fᵀ` onto signals whose transform is supported on `F`. Both are
//! orthogonal projectors. Their interplay governs sampling theory: a
//! band-limited signal can be recovered from its samples exactly when no
//! band-limited signal hides entirely outside `S`, i.e. when the composite
//! operator that clips to the complement of `S` and re-projects onto the band
//! has norm strictly below one.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::GraphSignal;
use crate::linalg;
use crate::sets::{FrequencySet, SamplingSet};
use crate::spectrum::Spectrum;

/// Tolerance for detecting a unit top eigenvalue in
/// [`perfect_localization`].
pub const LOCALIZATION_TOL: f64 = 1e-8;

/// Projector onto the span of the basis columns selected by a frequency set.
///
/// Stores the reduced basis `U_F` (`n x |F|`) rather than the full projector
/// matrix, so applications cost `O(n |F|)`.
#[derive(Clone, Debug)]
pub struct BandLimiter {
    freq: FrequencySet,
    reduced: DMatrix<f64>,
}

impl BandLimiter {
    /// Binds a frequency set to the eigenbasis of `spectrum`.
    pub fn new(spectrum: &Spectrum, freq: FrequencySet) -> Result<Self> {
        if let Some(&max) = freq.indices().last() {
            if max >= spectrum.n() {
                return Err(Error::IndexOutOfRange {
                    index: max,
                    size: spectrum.n(),
                });
            }
        }
        let reduced = spectrum.sub_basis(freq.indices());
        Ok(Self { freq, reduced })
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.reduced.nrows()
    }

    /// Cardinality of the frequency set.
    pub fn bandwidth(&self) -> usize {
        self.reduced.ncols()
    }

    /// The frequency set the projector is built on.
    pub fn freq(&self) -> &FrequencySet {
        &self.freq
    }

    /// The reduced basis `U_F` with one selected eigenvector per column.
    pub fn reduced_basis(&self) -> &DMatrix<f64> {
        &self.reduced
    }

    /// Applies the projector: `U_F U_Fᵀ x`.
    pub fn apply(&self, x: &GraphSignal) -> Result<GraphSignal> {
        let s = self.to_spectral(x)?;
        Ok(self.from_spectral(&s))
    }

    /// Band coefficients `U_Fᵀ x` of a vertex-domain signal.
    pub fn to_spectral(&self, x: &GraphSignal) -> Result<DVector<f64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(self.reduced.transpose() * x.as_vector())
    }

    /// Vertex-domain signal `U_F s` of band coefficients.
    ///
    /// Panics if `s` does not have `bandwidth()` entries.
    pub fn from_spectral(&self, s: &DVector<f64>) -> GraphSignal {
        GraphSignal::new(&self.reduced * s)
    }

    /// Materialises the full `n x n` projector matrix `U_F U_Fᵀ`.
    pub fn matrix(&self) -> DMatrix<f64> {
        &self.reduced * self.reduced.transpose()
    }

    /// The band-domain Gram matrix of sampled rows, `U_Fᵀ D U_F`
    /// (`|F| x |F|`, symmetric, eigenvalues in `[0, 1]`).
    pub fn sampled_gram(&self, set: &SamplingSet) -> DMatrix<f64> {
        let f = self.bandwidth();
        if let Some(&max) = set.indices().last() {
            assert!(max < self.n(), "sampling index {max} out of range");
        }
        let mut rows = DMatrix::zeros(set.len(), f);
        for (r, &i) in set.indices().iter().enumerate() {
            rows.set_row(r, &self.reduced.row(i));
        }
        rows.transpose() * rows
    }
}

/// Zeroes a signal outside the sampling set.
pub fn vertex_project(set: &SamplingSet, x: &GraphSignal) -> Result<GraphSignal> {
    if let Some(&max) = set.indices().last() {
        if max >= x.len() {
            return Err(Error::IndexOutOfRange {
                index: max,
                size: x.len(),
            });
        }
    }
    let mut out = DVector::zeros(x.len());
    for &i in set.indices() {
        out[i] = x[i];
    }
    Ok(GraphSignal::new(out))
}

/// Projects a signal onto the band (same as [`BandLimiter::apply`]).
pub fn band_project(band: &BandLimiter, x: &GraphSignal) -> Result<GraphSignal> {
    band.apply(x)
}

/// Operator norm of "clip to unobserved vertices, then band-limit":
/// `sqrt(λ_max(U_Fᵀ (I - D) U_F))`, equal to `sqrt(1 - λ_min(U_Fᵀ D U_F))`.
///
/// A value strictly below one certifies that samples on `set` determine every
/// signal in the band; one means some band signal is invisible on `set`.
pub fn dbar_b_norm(set: &SamplingSet, band: &BandLimiter) -> f64 {
    if band.bandwidth() == 0 {
        return 0.0;
    }
    let gram = band.sampled_gram(set);
    let lambda_min = linalg::sym_eigenvalues(&gram)[0];
    (1.0 - lambda_min).clamp(0.0, 1.0).sqrt()
}

/// Detects a band-limited signal perfectly localised on the sampling set.
///
/// Returns `Some(witness)` when the top eigenvalue of the band-domain Gram
/// matrix reaches one within [`LOCALIZATION_TOL`]; the witness is the
/// corresponding unit-norm vertex-domain signal, which lives in the band
/// and (up to tolerance) vanishes outside the set.
pub fn perfect_localization(set: &SamplingSet, band: &BandLimiter) -> Option<GraphSignal> {
    if band.bandwidth() == 0 {
        return None;
    }
    let gram = band.sampled_gram(set);
    let eig = linalg::sym_eigen(&gram).ok()?;
    let top = eig.values.len() - 1;
    if (eig.values[top] - 1.0).abs() <= LOCALIZATION_TOL {
        let v = eig.vectors.column(top).clone_owned();
        Some(band.from_spectral(&v))
    } else {
        None
    }
}
