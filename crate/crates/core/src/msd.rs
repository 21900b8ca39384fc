//! Closed-form mean-square analysis of the estimator in [`crate::lms`].
//!
//! With `A = U_Fᵀ D U_F`, the band-domain error `e[n] = s[n] - s0` evolves as
//! `e[n+1] = M e[n] + mu * U_Fᵀ D v[n]` with `M = I - mu * A`. Writing the
//! error covariance recursion through the Kronecker square `Q = M ⊗ M` gives
//! the steady-state mean square deviation
//!
//! ```text
//! MSD = mu² * vec(G)ᵀ (I - Q)⁻¹ vec(I),    G = U_Fᵀ D C_v D U_F,
//! ```
//!
//! which exists exactly when the spectral radius of `Q` is below one. The
//! same quadratic form with the weighting `vec(U_Fᵀ E_k U_F)` isolates the
//! deviation carried by vertex `k`, and expanding in the eigenbasis of `Q`
//! explains which sampling sets keep every mode well damped.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, vec_of};
use crate::operators::BandLimiter;
use crate::sets::{FrequencySet, SamplingSet};
use crate::spectrum::Spectrum;

/// Bandwidth above which `Q = M ⊗ M` is kept implicit (matvec form) instead
/// of materialised as a `|F|² x |F|²` matrix.
pub const Q_MATERIALIZE_LIMIT: usize = 32;

/// A steady state is declared to exist only when the spectral radius of `Q`
/// is below `1 - STABILITY_MARGIN`, keeping the modal denominators away
/// from zero.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Relative eigenvalue cutoff of the pseudo-inverse in [`msd_with_pinv`].
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-10;

/// One mode of the eigen-expansion of the steady-state deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsdMode {
    /// Eigenvalue of `Q` (a pairwise product of eigenvalues of `M`).
    pub eigenvalue: f64,
    /// The mode's additive contribution to the total deviation.
    pub term: f64,
}

/// Precomputed matrices of the mean-square analysis for one
/// `(band, sampling, noise, step)` configuration.
#[derive(Clone, Debug)]
pub struct TheoryModel {
    gram: DMatrix<f64>,
    g: DMatrix<f64>,
    m: DMatrix<f64>,
    q: Option<DMatrix<f64>>,
    reduced: DMatrix<f64>,
    mu: f64,
}

impl TheoryModel {
    /// Builds the analysis matrices from a spectrum and index sets.
    ///
    /// `noise_var` holds one variance per vertex (the diagonal of `C_v`).
    pub fn build(
        spectrum: &Spectrum,
        freq: &FrequencySet,
        sampling: &SamplingSet,
        noise_var: &DVector<f64>,
        mu: f64,
    ) -> Result<Self> {
        let band = BandLimiter::new(spectrum, freq.clone())?;
        Self::from_band(&band, sampling, noise_var, mu)
    }

    /// Same as [`TheoryModel::build`] from an existing band projector.
    pub fn from_band(
        band: &BandLimiter,
        sampling: &SamplingSet,
        noise_var: &DVector<f64>,
        mu: f64,
    ) -> Result<Self> {
        let n = band.n();
        if noise_var.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: noise_var.len(),
            });
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive, got {mu}"
            )));
        }
        for (i, &v) in noise_var.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "noise variance at vertex {i} is {v}"
                )));
            }
        }
        if let Some(&max) = sampling.indices().last() {
            if max >= n {
                return Err(Error::IndexOutOfRange { index: max, size: n });
            }
        }
        let f = band.bandwidth();
        let mut gram = DMatrix::zeros(f, f);
        let mut g = DMatrix::zeros(f, f);
        let reduced = band.reduced_basis();
        for &i in sampling.indices() {
            let row = reduced.row(i).transpose();
            let outer = &row * row.transpose();
            gram += &outer;
            let v = noise_var[i];
            if v > 0.0 {
                g += v * &outer;
            }
        }
        let m = DMatrix::identity(f, f) - mu * &gram;
        let q = (f > 0 && f <= Q_MATERIALIZE_LIMIT).then(|| m.kronecker(&m));
        Ok(Self {
            gram,
            g,
            m,
            q,
            reduced: reduced.clone(),
            mu,
        })
    }

    /// Sampled band Gram matrix `U_Fᵀ D U_F`.
    pub fn gram_matrix(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Noise-shaping matrix `G = U_Fᵀ D C_v D U_F`.
    pub fn g_matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Mean error map `M = I - mu * U_Fᵀ D U_F`.
    pub fn m_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Materialised `Q = M ⊗ M`, present when the bandwidth is at most
    /// [`Q_MATERIALIZE_LIMIT`].
    pub fn q_matrix(&self) -> Option<&DMatrix<f64>> {
        self.q.as_ref()
    }

    /// Step size `mu`.
    pub fn step_size(&self) -> f64 {
        self.mu
    }

    /// Cardinality of the frequency set.
    pub fn bandwidth(&self) -> usize {
        self.gram.nrows()
    }

    /// Spectral radius of `Q`, the square of the spectral radius of `M`.
    pub fn spectral_radius(&self) -> f64 {
        if self.bandwidth() == 0 {
            return 0.0;
        }
        let rho_m = self
            .m
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        rho_m * rho_m
    }

    /// True when a steady state exists with margin [`STABILITY_MARGIN`].
    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0 - STABILITY_MARGIN
    }

    fn check_stable(&self) -> Result<()> {
        let rho = self.spectral_radius();
        if rho >= 1.0 - STABILITY_MARGIN {
            return Err(Error::Unstable { rho });
        }
        Ok(())
    }

    /// Steady-state mean square deviation
    /// `mu² vec(G)ᵀ (I - Q)⁻¹ vec(I)`.
    ///
    /// Solved as a linear system when `Q` is materialised; otherwise through
    /// the eigenbasis of `M`, where the weighting `vec(I)` keeps only the
    /// diagonal modes.
    pub fn steady_state_msd(&self) -> Result<f64> {
        self.check_stable()?;
        let f = self.bandwidth();
        if f == 0 {
            return Ok(0.0);
        }
        if let Some(q) = &self.q {
            let z = self.solve_i_minus_q(q, &vec_of(&DMatrix::identity(f, f)))?;
            Ok(self.mu * self.mu * vec_of(&self.g).dot(&z))
        } else {
            let eig = linalg::sym_eigen(&self.m)?;
            let mut total = 0.0;
            for a in 0..f {
                let va = eig.vectors.column(a);
                let p = (va.transpose() * &self.g * va)[(0, 0)];
                total += p / (1.0 - eig.values[a] * eig.values[a]);
            }
            Ok(self.mu * self.mu * total)
        }
    }

    /// The deviation attributed to vertex `k`: the same quadratic form with
    /// weighting `vec(U_Fᵀ E_k U_F)`.
    pub fn per_vertex_msd(&self, k: usize) -> Result<f64> {
        let n = self.reduced.nrows();
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, size: n });
        }
        self.check_stable()?;
        if self.bandwidth() == 0 {
            return Ok(0.0);
        }
        let z = self.stein_solution()?;
        Ok(self.weighted_deviation(&z, k))
    }

    /// Per-vertex deviations for all vertices; their sum equals
    /// [`TheoryModel::steady_state_msd`].
    pub fn per_vertex_msd_all(&self) -> Result<Vec<f64>> {
        self.check_stable()?;
        let n = self.reduced.nrows();
        if self.bandwidth() == 0 {
            return Ok(vec![0.0; n]);
        }
        let z = self.stein_solution()?;
        Ok((0..n).map(|k| self.weighted_deviation(&z, k)).collect())
    }

    fn weighted_deviation(&self, z: &DMatrix<f64>, k: usize) -> f64 {
        let row = self.reduced.row(k).transpose();
        self.mu * self.mu * (row.transpose() * z * &row)[(0, 0)]
    }

    /// Solves the discrete-time Lyapunov-type equation `Z = M Z M + G`,
    /// i.e. `unvec((I - Q)⁻¹ vec(G))`.
    fn stein_solution(&self) -> Result<DMatrix<f64>> {
        let f = self.bandwidth();
        if let Some(q) = &self.q {
            let z = self.solve_i_minus_q(q, &vec_of(&self.g))?;
            Ok(DMatrix::from_column_slice(f, f, z.as_slice()))
        } else {
            let eig = linalg::sym_eigen(&self.m)?;
            let gt = eig.vectors.transpose() * &self.g * &eig.vectors;
            let mut zt = DMatrix::zeros(f, f);
            for a in 0..f {
                for b in 0..f {
                    zt[(a, b)] = gt[(a, b)] / (1.0 - eig.values[a] * eig.values[b]);
                }
            }
            Ok(&eig.vectors * zt * eig.vectors.transpose())
        }
    }

    fn solve_i_minus_q(&self, q: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let dim = q.nrows();
        let iq = DMatrix::identity(dim, dim) - q;
        iq.lu().solve(rhs).ok_or(Error::EigenSolverFailure)
    }

    /// Modal decomposition of the steady-state deviation: one term per
    /// eigenvalue of `Q`, summing to [`TheoryModel::steady_state_msd`].
    ///
    /// The eigenvalues are pairwise products of eigenvalues of `M`; modes
    /// whose eigenvector is orthogonal to `vec(I)` contribute zero, so only
    /// diagonal pairs matter.
    pub fn msd_eigen_expansion(&self) -> Result<Vec<MsdMode>> {
        self.check_stable()?;
        let f = self.bandwidth();
        if f == 0 {
            return Ok(Vec::new());
        }
        let mu2 = self.mu * self.mu;
        if let Some(q) = &self.q {
            let eig = linalg::sym_eigen(q)?;
            let p = eig.vectors.transpose() * vec_of(&self.g);
            let w = eig.vectors.transpose() * vec_of(&DMatrix::identity(f, f));
            Ok((0..f * f)
                .map(|i| MsdMode {
                    eigenvalue: eig.values[i],
                    term: mu2 * p[i] * w[i] / (1.0 - eig.values[i]),
                })
                .collect())
        } else {
            let eig = linalg::sym_eigen(&self.m)?;
            let gt = eig.vectors.transpose() * &self.g * &eig.vectors;
            let mut modes = Vec::with_capacity(f * f);
            for b in 0..f {
                for a in 0..f {
                    let lambda = eig.values[a] * eig.values[b];
                    let term = if a == b {
                        mu2 * gt[(a, a)] / (1.0 - lambda)
                    } else {
                        0.0
                    };
                    modes.push(MsdMode {
                        eigenvalue: lambda,
                        term,
                    });
                }
            }
            Ok(modes)
        }
    }

    /// Pseudo-inverse variant of the deviation objective (see
    /// [`msd_with_pinv`]), usable for rank-deficient sampling sets. Runs on
    /// the materialised `Q` when available and through the eigenbasis of `M`
    /// otherwise.
    pub fn msd_pinv(&self) -> f64 {
        if self.bandwidth() == 0 {
            return 0.0;
        }
        match &self.q {
            Some(q) => msd_with_pinv(&self.g, q, self.mu),
            None => msd_pinv_from_gram(&self.gram, &self.g, self.mu),
        }
    }
}

/// Deviation objective through the pseudo-inverse,
/// `mu² vec(G)ᵀ (I - Q)† vec(I)`.
///
/// `(I - Q)` is eigendecomposed and eigenvalues below
/// [`PINV_RELATIVE_CUTOFF`] times the largest are treated as zero, so the
/// value stays finite for rank-deficient sampling sets and coincides with
/// [`TheoryModel::steady_state_msd`] in the full-rank stable case.
pub fn msd_with_pinv(g: &DMatrix<f64>, q: &DMatrix<f64>, mu: f64) -> f64 {
    let f = g.nrows();
    if f == 0 {
        return 0.0;
    }
    let dim = q.nrows();
    let iq = DMatrix::identity(dim, dim) - q;
    let eig = match linalg::sym_eigen(&iq) {
        Ok(e) => e,
        Err(_) => return 0.0,
    };
    let w_max = eig.values[dim - 1];
    if w_max <= 0.0 {
        return 0.0;
    }
    let cutoff = PINV_RELATIVE_CUTOFF * w_max;
    let p = eig.vectors.transpose() * vec_of(g);
    let w = eig.vectors.transpose() * vec_of(&DMatrix::identity(f, f));
    let mut total = 0.0;
    for i in 0..dim {
        if eig.values[i] > cutoff {
            total += p[i] * w[i] / eig.values[i];
        }
    }
    mu * mu * total
}

/// Implicit-form twin of [`msd_with_pinv`] working from the band Gram matrix
/// `A = U_Fᵀ D U_F` instead of a materialised `Q`. Used by the greedy
/// sampling strategies, where it is evaluated once per candidate vertex.
pub(crate) fn msd_pinv_from_gram(gram: &DMatrix<f64>, g: &DMatrix<f64>, mu: f64) -> f64 {
    let f = gram.nrows();
    if f == 0 {
        return 0.0;
    }
    let eig = match linalg::sym_eigen(gram) {
        Ok(e) => e,
        Err(_) => return 0.0,
    };
    let m: Vec<f64> = eig.values.iter().map(|&a| 1.0 - mu * a).collect();
    let mut w_max = f64::NEG_INFINITY;
    for a in 0..f {
        for b in 0..f {
            w_max = w_max.max(1.0 - m[a] * m[b]);
        }
    }
    if w_max <= 0.0 {
        return 0.0;
    }
    let cutoff = PINV_RELATIVE_CUTOFF * w_max;
    let mut total = 0.0;
    for (a, &ma) in m.iter().enumerate() {
        let w = 1.0 - ma * ma;
        if w > cutoff {
            let va = eig.vectors.column(a);
            let p = (va.transpose() * g * va)[(0, 0)];
            total += p / w;
        }
    }
    mu * mu * total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use approx::assert_abs_diff_eq;

    fn ring(n: usize) -> Spectrum {
        let mut edges: Vec<(usize, usize, f64)> = (0..n - 1)
            .map(|i| (i, i + 1, 1.0 + 0.1 * i as f64))
            .collect();
        edges.push((0, n - 1, 0.7));
        Spectrum::decompose(&Graph::from_edges(n, &edges).unwrap()).unwrap()
    }

    fn model(
        n: usize,
        f: usize,
        s: Vec<usize>,
        var: f64,
        mu: f64,
    ) -> TheoryModel {
        let spectrum = ring(n);
        TheoryModel::build(
            &spectrum,
            &FrequencySet::lowest(f, n).unwrap(),
            &SamplingSet::new(s, n).unwrap(),
            &DVector::from_element(n, var),
            mu,
        )
        .unwrap()
    }

    #[test]
    fn noiseless_model_has_zero_deviation() {
        let t = model(6, 2, vec![0, 2, 4], 0.0, 0.5);
        assert_eq!(t.g_matrix().amax(), 0.0);
        assert_eq!(t.steady_state_msd().unwrap(), 0.0);
        assert!(t.per_vertex_msd_all().unwrap().iter().all(|&v| v == 0.0));
        assert_eq!(t.msd_pinv(), 0.0);
    }

    #[test]
    fn full_sampling_white_noise_gives_scaled_identity() {
        let t = model(6, 3, (0..6).collect(), 0.04, 0.5);
        let expect = DMatrix::identity(3, 3) * 0.04;
        assert!((t.g_matrix() - expect).amax() < 1e-12);
    }

    #[test]
    fn kronecker_identity_on_random_weighting() {
        let t = model(6, 3, vec![0, 1, 3], 0.01, 0.4);
        let q = t.q_matrix().expect("materialised");
        let phi = DMatrix::from_fn(3, 3, |i, j| ((i * 3 + j) as f64 * 0.37).sin());
        let lhs = q * vec_of(&phi);
        let rhs = vec_of(&(t.m_matrix() * &phi * t.m_matrix()));
        assert!((lhs - rhs).amax() < 1e-10);
    }

    #[test]
    fn scalar_band_matches_geometric_series() {
        for &mu in &[0.1, 0.5, 1.0] {
            let t = model(5, 1, (0..5).collect(), 0.09, mu);
            let expect = mu * 0.09 / (2.0 - mu);
            assert_abs_diff_eq!(t.steady_state_msd().unwrap(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn per_vertex_sums_to_global() {
        let t = model(7, 3, vec![0, 2, 3, 5, 6], 0.02, 0.6);
        let total: f64 = t.per_vertex_msd_all().unwrap().iter().sum();
        let global = t.steady_state_msd().unwrap();
        assert!((total - global).abs() <= 1e-9 * global.max(1.0));
        assert_abs_diff_eq!(
            t.per_vertex_msd(3).unwrap(),
            t.per_vertex_msd_all().unwrap()[3],
            epsilon = 1e-14
        );
    }

    #[test]
    fn modal_terms_sum_to_msd_and_eigenvalues_are_products() {
        let t = model(6, 3, vec![0, 1, 2, 4], 0.03, 0.5);
        let modes = t.msd_eigen_expansion().unwrap();
        assert_eq!(modes.len(), 9);
        let sum: f64 = modes.iter().map(|m| m.term).sum();
        let msd = t.steady_state_msd().unwrap();
        assert!((sum - msd).abs() <= 1e-8 * msd);

        // pairwise products of M's eigenvalues
        let m_eigs = linalg::sym_eigenvalues(t.m_matrix());
        let mut products: Vec<f64> = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                products.push(m_eigs[a] * m_eigs[b]);
            }
        }
        let mut got: Vec<f64> = modes.iter().map(|m| m.eigenvalue).collect();
        products.sort_by(|x, y| x.partial_cmp(y).unwrap());
        got.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (p, g) in products.iter().zip(&got) {
            assert!((p - g).abs() < 1e-9);
        }
    }

    #[test]
    fn single_mode_scalar_case() {
        let t = model(5, 1, (0..5).collect(), 0.09, 0.5);
        let modes = t.msd_eigen_expansion().unwrap();
        assert_eq!(modes.len(), 1);
        assert_abs_diff_eq!(
            modes[0].term,
            t.steady_state_msd().unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn pinv_equals_inverse_when_full_rank() {
        let t = model(7, 3, vec![0, 1, 3, 5], 0.02, 0.5);
        let msd = t.steady_state_msd().unwrap();
        assert!((t.msd_pinv() - msd).abs() <= 1e-9 * msd);
    }

    #[test]
    fn pinv_zero_for_empty_sampling() {
        let t = model(6, 2, vec![], 0.05, 0.5);
        assert_eq!(t.msd_pinv(), 0.0);
    }

    #[test]
    fn pinv_rank_deficient_matches_svd_oracle() {
        let t = model(6, 2, vec![3], 0.05, 0.5);
        let value = t.msd_pinv();
        assert!(value.is_finite() && value > 0.0);

        // independent oracle: SVD-based pseudo-inverse of (I - Q)
        let q = t.q_matrix().unwrap();
        let iq = DMatrix::identity(4, 4) - q;
        let pinv = iq.svd(true, true).pseudo_inverse(1e-10).unwrap();
        let oracle = 0.25
            * (vec_of(t.g_matrix()).transpose()
                * pinv
                * vec_of(&DMatrix::identity(2, 2)))[(0, 0)];
        assert!((value - oracle).abs() <= 1e-9 * oracle.max(1e-12));

        // and the gram-based twin agrees with the materialised route
        let direct = msd_with_pinv(t.g_matrix(), q, 0.5);
        assert!((value - direct).abs() <= 1e-12);
    }

    #[test]
    fn rank_deficient_sampling_is_unstable() {
        let t = model(6, 3, vec![1], 0.01, 0.5);
        assert!(!t.is_stable());
        assert!(matches!(
            t.steady_state_msd(),
            Err(Error::Unstable { .. })
        ));
        assert!(matches!(t.per_vertex_msd(0), Err(Error::Unstable { .. })));
        assert!(t.msd_eigen_expansion().is_err());
    }

    #[test]
    fn oversized_step_is_unstable() {
        let spectrum = ring(6);
        let freq = FrequencySet::lowest(2, 6).unwrap();
        let sampling = SamplingSet::new(vec![0, 2, 4, 5], 6).unwrap();
        let var = DVector::from_element(6, 0.01);
        let stable = TheoryModel::build(&spectrum, &freq, &sampling, &var, 0.5).unwrap();
        assert!(stable.is_stable());
        let gram_top = linalg::lambda_max_sym(&stable.gram);
        let t = TheoryModel::build(&spectrum, &freq, &sampling, &var, 2.0 / gram_top * 1.01).unwrap();
        assert!(!t.is_stable());
        assert!(t.steady_state_msd().is_err());
    }

    #[test]
    fn noise_scaling_is_linear() {
        let spectrum = ring(7);
        let freq = FrequencySet::lowest(3, 7).unwrap();
        let sampling = SamplingSet::new(vec![0, 2, 4, 6], 7).unwrap();
        let base: DVector<f64> =
            DVector::from_iterator(7, (0..7).map(|i| 0.001 * (i + 1) as f64));
        let t1 = TheoryModel::build(&spectrum, &freq, &sampling, &base, 0.5).unwrap();
        let t3 = TheoryModel::build(&spectrum, &freq, &sampling, &(3.0 * &base), 0.5).unwrap();
        let a = t1.steady_state_msd().unwrap();
        let b = t3.steady_state_msd().unwrap();
        assert!((b - 3.0 * a).abs() <= 1e-10 * b.abs().max(1.0));
    }

    #[test]
    fn implicit_route_matches_materialised() {
        // same configuration, one model forced onto the implicit path by a
        // bandwidth above the materialisation limit is impractical here, so
        // exercise the implicit formulas directly via a copy without q.
        let t = model(7, 3, vec![0, 2, 3, 5, 6], 0.02, 0.6);
        let implicit = TheoryModel {
            q: None,
            ..t.clone()
        };
        let a = t.steady_state_msd().unwrap();
        let b = implicit.steady_state_msd().unwrap();
        assert!((a - b).abs() <= 1e-11 * a.max(1.0));

        let pa = t.per_vertex_msd_all().unwrap();
        let pb = implicit.per_vertex_msd_all().unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).abs() <= 1e-11);
        }

        let sum_a: f64 = t.msd_eigen_expansion().unwrap().iter().map(|m| m.term).sum();
        let sum_b: f64 = implicit
            .msd_eigen_expansion()
            .unwrap()
            .iter()
            .map(|m| m.term)
            .sum();
        assert!((sum_a - sum_b).abs() <= 1e-10 * sum_a.max(1.0));

        let rank_def = model(6, 2, vec![3], 0.05, 0.5);
        let implicit_rd = TheoryModel {
            q: None,
            ..rank_def.clone()
        };
        assert!((rank_def.msd_pinv() - implicit_rd.msd_pinv()).abs() <= 1e-12);
    }

    #[test]
    fn stability_matches_norm_and_step_conditions() {
        let spectrum = ring(8);
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..40 {
            let f = 1 + trial % 4;
            let m_samples = 1 + (trial * 7) % 8;
            let freq = FrequencySet::lowest(f, 8).unwrap();
            let mut idx: Vec<usize> = (0..8).collect();
            for i in (1..8).rev() {
                let j = (next() * (i + 1) as f64) as usize;
                idx.swap(i, j);
            }
            idx.truncate(m_samples);
            let sampling = SamplingSet::new(idx, 8).unwrap();
            let mu = 0.05 + 2.5 * next();
            let t = TheoryModel::build(
                &spectrum,
                &freq,
                &sampling,
                &DVector::from_element(8, 0.01),
                mu,
            )
            .unwrap();
            let band = BandLimiter::new(&spectrum, freq).unwrap();
            let dbar = crate::operators::dbar_b_norm(&sampling, &band);
            let top = linalg::lambda_max_sym(&t.gram);
            let conditions = dbar < 1.0 - 1e-9 && top > 0.0 && mu < 2.0 / top;
            assert_eq!(t.is_stable(), conditions, "trial {trial}");
        }
    }
}
