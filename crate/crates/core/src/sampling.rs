//! Greedy and random selection of the vertices to observe.
//!
//! All greedy strategies grow the sampling set one vertex at a time,
//! evaluating every remaining candidate against an objective on the band
//! Gram matrix `A_S = U_Fᵀ D_S U_F` and keeping the best (ties go to the
//! lowest vertex index, so selection is fully deterministic). Candidate
//! evaluations within one step are independent and run in parallel.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::msd;
use crate::operators::BandLimiter;
use crate::par;
use crate::sets::{FrequencySet, SamplingSet};
use crate::spectrum::Spectrum;

/// Eigenvalues below this fraction of the largest are treated as zero when
/// computing pseudo-determinants and minimum nonzero eigenvalues.
pub const RANK_RELATIVE_CUTOFF: f64 = 1e-12;

/// Which selection strategy to run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum SamplerKind {
    /// Greedy minimisation of the pseudo-inverse deviation objective.
    MinMsd,
    /// Greedy maximisation of the pseudo-determinant of the Gram matrix.
    MaxDet,
    /// Greedy maximisation of the minimum nonzero Gram eigenvalue.
    MaxLambdaMin,
    /// Uniform choice without replacement, reproducible per seed.
    Random { seed: u64 },
}

impl Default for SamplerKind {
    /// The workhorse strategy: cheap, deterministic, near-optimal volume.
    fn default() -> Self {
        Self::MaxDet
    }
}

impl SamplerKind {
    /// Short stable name used in CLI output and result files.
    pub fn name(&self) -> &'static str {
        match self {
            Self::MinMsd => "min_msd",
            Self::MaxDet => "max_det",
            Self::MaxLambdaMin => "max_lambda_min",
            Self::Random { .. } => "random",
        }
    }
}

struct GreedyState {
    rows: Vec<DVector<f64>>,
    gram: DMatrix<f64>,
    picked: Vec<usize>,
    // noise-shaped gram, only maintained for the deviation objective
    g: Option<DMatrix<f64>>,
    noise_var: Vec<f64>,
    mu: f64,
}

impl GreedyState {
    fn new(band: &BandLimiter, noise_var: Option<&DVector<f64>>, mu: f64) -> Self {
        let f = band.bandwidth();
        let rows = (0..band.n())
            .map(|i| band.reduced_basis().row(i).transpose())
            .collect();
        Self {
            rows,
            gram: DMatrix::zeros(f, f),
            picked: Vec::new(),
            g: noise_var.map(|_| DMatrix::zeros(f, f)),
            noise_var: noise_var.map(|v| v.iter().copied().collect()).unwrap_or_default(),
            mu,
        }
    }

    fn candidate_gram(&self, j: usize) -> DMatrix<f64> {
        &self.gram + &self.rows[j] * self.rows[j].transpose()
    }

    fn add(&mut self, j: usize) {
        let outer = &self.rows[j] * self.rows[j].transpose();
        self.gram += &outer;
        self.picked.push(j);
        if let Some(g) = &mut self.g {
            *g += self.noise_var[j] * outer;
        }
    }
}

/// Sum of logs of eigenvalues above the relative rank cutoff; zero for the
/// zero matrix (empty product). Comparisons happen in this log domain to
/// avoid underflow at larger set sizes.
fn log_pseudo_det(eigs: &DVector<f64>) -> f64 {
    let top = eigs[eigs.len() - 1];
    if top <= 0.0 {
        return 0.0;
    }
    let cutoff = RANK_RELATIVE_CUTOFF * top;
    eigs.iter().filter(|&&v| v > cutoff).map(|v| v.ln()).sum()
}

/// Minimum eigenvalue above the relative rank cutoff; zero for the zero
/// matrix.
fn min_nonzero_eig(eigs: &DVector<f64>) -> f64 {
    let top = eigs[eigs.len() - 1];
    if top <= 0.0 {
        return 0.0;
    }
    let cutoff = RANK_RELATIVE_CUTOFF * top;
    eigs.iter().copied().filter(|&v| v > cutoff).fold(top, f64::min)
}

fn validate_m(m: usize, n: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::InvalidConfig(format!(
            "sample count must be in 1..={n}, got {m}"
        )));
    }
    Ok(())
}

fn greedy<C: Sync>(
    band: &BandLimiter,
    m: usize,
    noise_var: Option<&DVector<f64>>,
    mu: f64,
    serial: bool,
    prepare: impl Fn(&GreedyState) -> C,
    score: impl Fn(&GreedyState, &C, usize) -> f64 + Sync + Send,
) -> Result<SamplingSet> {
    let n = band.n();
    validate_m(m, n)?;
    let mut state = GreedyState::new(band, noise_var, mu);
    let mut chosen = vec![false; n];
    for _ in 0..m {
        let candidates: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
        let ctx = prepare(&state);
        let eval = |k: usize| score(&state, &ctx, candidates[k]);
        let scores = if serial {
            par::map_indexed_serial(candidates.len(), eval)
        } else {
            par::map_indexed(candidates.len(), eval)
        };
        // strict comparison keeps the lowest index on ties
        let mut best = 0;
        for k in 1..candidates.len() {
            if scores[k] > scores[best] {
                best = k;
            }
        }
        let j = candidates[best];
        chosen[j] = true;
        state.add(j);
    }
    SamplingSet::new(state.picked, n)
}

fn min_msd_impl(
    spectrum: &Spectrum,
    freq: &FrequencySet,
    noise_var: &DVector<f64>,
    mu: f64,
    m: usize,
    serial: bool,
) -> Result<SamplingSet> {
    let band = BandLimiter::new(spectrum, freq.clone())?;
    if noise_var.len() != band.n() {
        return Err(Error::DimensionMismatch {
            expected: band.n(),
            got: noise_var.len(),
        });
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step size must be positive, got {mu}"
        )));
    }
    greedy(&band, m, Some(noise_var), mu, serial, |_| (), |state, _, j| {
        let gram = state.candidate_gram(j);
        let g = state.g.as_ref().expect("g maintained")
            + state.noise_var[j] * (&state.rows[j] * state.rows[j].transpose());
        // minimisation: negate for the shared argmax
        -msd::msd_pinv_from_gram(&gram, &g, state.mu)
    })
}

/// Greedy selection minimising the pseudo-inverse steady-state deviation of
/// the would-be estimator at step size `mu` under the given noise profile.
pub fn select_min_msd(
    spectrum: &Spectrum,
    freq: &FrequencySet,
    noise_var: &DVector<f64>,
    mu: f64,
    m: usize,
) -> Result<SamplingSet> {
    min_msd_impl(spectrum, freq, noise_var, mu, m, false)
}

/// Sequential twin of [`select_min_msd`]; same result, one thread.
pub fn select_min_msd_serial(
    spectrum: &Spectrum,
    freq: &FrequencySet,
    noise_var: &DVector<f64>,
    mu: f64,
    m: usize,
) -> Result<SamplingSet> {
    min_msd_impl(spectrum, freq, noise_var, mu, m, true)
}

/// Per-step scoring context for the volume greedy: while the Gram matrix is
/// rank deficient the growth factor of the picked rows' (invertible) inner
/// Gram is used; once it is positive definite the classic rank-one
/// determinant update takes over. Both are exact monotone surrogates of the
/// pseudo-determinant of the candidate Gram, evaluated in O(k²) per
/// candidate instead of a full eigendecomposition. If either factorization
/// breaks down (duplicated or vanishing rows), the step falls back to the
/// eigenvalue definition.
enum VolumeCtx {
    /// Rank still growing: Cholesky of `R Rᵀ` over the picked rows `R`.
    Grow {
        picked_rows: DMatrix<f64>,
        chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    },
    /// Gram positive definite: Cholesky of the band Gram itself.
    Boost(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    /// Degenerate instance: score by the eigenvalue definition directly.
    Spectral,
}

fn volume_ctx(state: &GreedyState) -> VolumeCtx {
    let k = state.picked.len();
    let f = state.gram.nrows();
    if k >= f {
        if let Some(chol) = nalgebra::Cholesky::new(state.gram.clone()) {
            return VolumeCtx::Boost(chol);
        }
        return VolumeCtx::Spectral;
    }
    let mut picked_rows = DMatrix::zeros(k, f);
    for (r, &i) in state.picked.iter().enumerate() {
        picked_rows.row_mut(r).copy_from(&state.rows[i].transpose());
    }
    match nalgebra::Cholesky::new(&picked_rows * picked_rows.transpose()) {
        Some(chol) => VolumeCtx::Grow { picked_rows, chol },
        None => VolumeCtx::Spectral,
    }
}

fn volume_score(state: &GreedyState, ctx: &VolumeCtx, j: usize) -> f64 {
    let u = &state.rows[j];
    match ctx {
        // volume gained by a new independent row: its squared distance to
        // the span of the picked rows (Schur complement of the bordered
        // inner Gram)
        VolumeCtx::Grow { picked_rows, chol } => {
            let b = picked_rows * u;
            u.norm_squared() - chol.solve(&b).dot(&b)
        }
        // det(A + uuᵀ) = det(A)·(1 + uᵀA⁻¹u), shared det(A) dropped
        VolumeCtx::Boost(chol) => chol.solve(u).dot(u),
        VolumeCtx::Spectral => {
            let eigs = crate::linalg::sym_eigenvalues(&state.candidate_gram(j));
            log_pseudo_det(&eigs)
        }
    }
}

/// Greedy selection maximising the pseudo-determinant of the band Gram
/// matrix (volume of the sampled rows).
pub fn select_max_det(spectrum: &Spectrum, freq: &FrequencySet, m: usize) -> Result<SamplingSet> {
    let band = BandLimiter::new(spectrum, freq.clone())?;
    let n = band.n();
    validate_m(m, n)?;
    if m == n {
        return Ok(SamplingSet::all(n));
    }
    greedy(&band, m, None, 1.0, false, volume_ctx, volume_score)
}

/// Greedy selection maximising the minimum nonzero eigenvalue of the band
/// Gram matrix.
pub fn select_max_lambda_min(
    spectrum: &Spectrum,
    freq: &FrequencySet,
    m: usize,
) -> Result<SamplingSet> {
    let band = BandLimiter::new(spectrum, freq.clone())?;
    greedy(&band, m, None, 1.0, false, |_| (), |state, _, j| {
        let eigs = crate::linalg::sym_eigenvalues(&state.candidate_gram(j));
        min_nonzero_eig(&eigs)
    })
}

/// Uniform sampling set without replacement, deterministic per seed.
pub fn select_random(n: usize, m: usize, seed: u64) -> Result<SamplingSet> {
    use rand::SeedableRng;
    validate_m(m, n)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, n, m).into_vec();
    SamplingSet::new(picked, n)
}

/// Dispatches to the strategy selected by `kind`. `noise_var` and `mu` are
/// consulted only by [`SamplerKind::MinMsd`].
pub fn select(
    kind: &SamplerKind,
    spectrum: &Spectrum,
    freq: &FrequencySet,
    noise_var: &DVector<f64>,
    mu: f64,
    m: usize,
) -> Result<SamplingSet> {
    match kind {
        SamplerKind::MinMsd => select_min_msd(spectrum, freq, noise_var, mu, m),
        SamplerKind::MaxDet => select_max_det(spectrum, freq, m),
        SamplerKind::MaxLambdaMin => select_max_lambda_min(spectrum, freq, m),
        SamplerKind::Random { seed } => select_random(spectrum.n(), m, *seed),
    }
}
