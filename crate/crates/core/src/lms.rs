//! Online least-mean-squares estimation of a band-limited signal from
//! streaming noisy vertex samples.
//!
//! The estimator tracks the band coefficients `s` of the unknown signal
//! `x0 = U_F s0`. Each iteration observes `y[n] = D (x0 + v[n])`, where `D`
//! keeps only the sampled vertices and `v[n]` is independent zero-mean
//! Gaussian noise, and performs the stochastic-gradient update
//!
//! ```text
//! s[n+1] = s[n] + mu * U_Fᵀ D (y[n] - U_F s[n])
//! ```
//!
//! which is the band-coefficient form of "project the masked innovation back
//! onto the band". The mean error follows `I - mu * A` with
//! `A = U_Fᵀ D U_F`, so the recursion is mean-square stable for
//! `0 < mu < 2 / λ_max(A)`, and converges to the true signal exactly when
//! samples on `D` determine the band (see [`crate::operators::dbar_b_norm`]).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::graph::GraphSignal;
use crate::linalg;
use crate::noise;
use crate::operators::BandLimiter;
use crate::sets::SamplingSet;

/// A run is declared divergent once the squared deviation passes this.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Tolerance used to verify that a declared truth signal is band-limited.
pub const BAND_LIMIT_TOL: f64 = 1e-10;

/// Ground truth, noise model and sampling pattern generating observations.
#[derive(Clone, Debug)]
pub struct ObservationModel {
    truth: GraphSignal,
    spectral_truth: DVector<f64>,
    noise_var: DVector<f64>,
    sampling: SamplingSet,
    band: BandLimiter,
    seed: u64,
}

impl ObservationModel {
    /// Builds a model whose truth must lie in the band of `band` (checked to
    /// [`BAND_LIMIT_TOL`] in the max norm).
    pub fn new(
        band: BandLimiter,
        sampling: SamplingSet,
        truth: GraphSignal,
        noise_var: DVector<f64>,
        seed: u64,
    ) -> Result<Self> {
        let model = Self::with_aliased_truth(band, sampling, truth, noise_var, seed)?;
        let projected = model.band.from_spectral(&model.spectral_truth);
        if (projected.as_vector() - model.truth.as_vector()).amax() > BAND_LIMIT_TOL {
            return Err(Error::InvalidConfig(
                "truth signal is not band-limited on the given frequency set".into(),
            ));
        }
        Ok(model)
    }

    /// Builds a model without the band-limited check on the truth.
    ///
    /// Used for model-mismatch studies: the estimator still searches within
    /// the band, but deviations are measured against the full truth, so an
    /// out-of-band component puts a floor on the reachable error.
    pub fn with_aliased_truth(
        band: BandLimiter,
        sampling: SamplingSet,
        truth: GraphSignal,
        noise_var: DVector<f64>,
        seed: u64,
    ) -> Result<Self> {
        let n = band.n();
        if truth.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: truth.len(),
            });
        }
        if noise_var.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: noise_var.len(),
            });
        }
        if let Some(&max) = sampling.indices().last() {
            if max >= n {
                return Err(Error::IndexOutOfRange { index: max, size: n });
            }
        }
        for (i, &v) in noise_var.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "noise variance at vertex {i} is {v}"
                )));
            }
        }
        let spectral_truth = band.to_spectral(&truth)?;
        Ok(Self {
            truth,
            spectral_truth,
            noise_var,
            sampling,
            band,
            seed,
        })
    }

    /// Observed signal at iteration `n`: truth plus noise on the sampled
    /// vertices, exact zeros elsewhere.
    ///
    /// Draws are keyed by `(seed, n, vertex)`, so the same position always
    /// yields the same value and zero-variance vertices consume no
    /// randomness.
    pub fn observe(&self, iteration: u64) -> GraphSignal {
        let mut y = DVector::zeros(self.truth.len());
        for &i in self.sampling.indices() {
            let mut v = self.truth[i];
            let var = self.noise_var[i];
            if var > 0.0 {
                v += var.sqrt() * noise::standard_normal_at(self.seed, iteration, i as u64);
            }
            y[i] = v;
        }
        GraphSignal::new(y)
    }

    /// Largest step size for which the mean recursion is stable:
    /// `2 / λ_max(U_Fᵀ D U_F)`. Errors when the sampled vertices carry no
    /// band energy at all (the bound would be infinite).
    pub fn max_stable_step(&self) -> Result<f64> {
        if self.band.bandwidth() == 0 {
            return Err(Error::EmptyBandEnergy);
        }
        let gram = self.band.sampled_gram(&self.sampling);
        let lambda_max = linalg::lambda_max_sym(&gram);
        if lambda_max <= 0.0 {
            return Err(Error::EmptyBandEnergy);
        }
        Ok(2.0 / lambda_max)
    }

    /// The true vertex-domain signal.
    pub fn truth(&self) -> &GraphSignal {
        &self.truth
    }

    /// Band coefficients of the truth, `U_Fᵀ x0`.
    pub fn spectral_truth(&self) -> &DVector<f64> {
        &self.spectral_truth
    }

    /// Per-vertex noise variances.
    pub fn noise_var(&self) -> &DVector<f64> {
        &self.noise_var
    }

    /// The sampling set.
    pub fn sampling(&self) -> &SamplingSet {
        &self.sampling
    }

    /// The band projector.
    pub fn band(&self) -> &BandLimiter {
        &self.band
    }

    /// The noise stream seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Estimator state: current band coefficients, step size and iteration count.
#[derive(Clone, Debug)]
pub struct LmsState {
    estimate: DVector<f64>,
    step_size: f64,
    iteration: usize,
}

impl LmsState {
    /// Starts from the given band coefficients.
    pub fn new(initial: DVector<f64>, step_size: f64) -> Self {
        Self {
            estimate: initial,
            step_size,
            iteration: 0,
        }
    }

    /// Starts from zero coefficients.
    pub fn zeros(bandwidth: usize, step_size: f64) -> Self {
        Self::new(DVector::zeros(bandwidth), step_size)
    }

    /// Current band coefficients.
    pub fn estimate_spectral(&self) -> &DVector<f64> {
        &self.estimate
    }

    /// Current vertex-domain estimate `U_F s`.
    pub fn vertex_estimate(&self, band: &BandLimiter) -> GraphSignal {
        band.from_spectral(&self.estimate)
    }

    /// Step size `mu`.
    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    /// Number of updates applied so far.
    pub fn iteration(&self) -> usize {
        self.iteration
    }
}

/// One update with observation `y`: returns the advanced state.
///
/// Entries of `y` outside the sampling set are ignored (the innovation is
/// masked before being projected back onto the band).
pub fn lms_step(state: &LmsState, model: &ObservationModel, y: &GraphSignal) -> Result<LmsState> {
    let band = model.band();
    if y.len() != band.n() {
        return Err(Error::DimensionMismatch {
            expected: band.n(),
            got: y.len(),
        });
    }
    if state.estimate.len() != band.bandwidth() {
        return Err(Error::DimensionMismatch {
            expected: band.bandwidth(),
            got: state.estimate.len(),
        });
    }
    let predicted = band.from_spectral(&state.estimate);
    let mut masked = DVector::zeros(band.n());
    for &i in model.sampling().indices() {
        masked[i] = y[i] - predicted[i];
    }
    let gradient = band.reduced_basis().transpose() * masked;
    Ok(LmsState {
        estimate: &state.estimate + state.step_size * gradient,
        step_size: state.step_size,
        iteration: state.iteration + 1,
    })
}

/// How to initialise the estimator.
#[derive(Clone, Debug)]
pub enum InitialEstimate {
    /// All-zero band coefficients.
    Zero,
    /// Independent standard-normal coefficients from a seeded stream.
    Seeded { seed: u64 },
    /// Truth coefficients plus `amplitude` along the slowest-mixing
    /// direction (the top eigenvector of `U_Fᵀ D U_F`). Useful for stress
    /// tests: this is the direction that diverges first.
    WorstMode { amplitude: f64 },
    /// Explicit band coefficients.
    Given(DVector<f64>),
}

impl InitialEstimate {
    pub(crate) fn build(&self, model: &ObservationModel) -> Result<DVector<f64>> {
        let f = model.band().bandwidth();
        match self {
            Self::Zero => Ok(DVector::zeros(f)),
            Self::Seeded { seed } => Ok(DVector::from_vec(noise::normal_vector(*seed, f))),
            Self::WorstMode { amplitude } => {
                let gram = model.band().sampled_gram(model.sampling());
                let eig = linalg::sym_eigen(&gram)?;
                let top = eig.vectors.column(f - 1).clone_owned();
                Ok(model.spectral_truth() + *amplitude * top)
            }
            Self::Given(v) => {
                if v.len() != f {
                    return Err(Error::DimensionMismatch {
                        expected: f,
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
        }
    }
}

/// Trajectory of one estimation run.
#[derive(Clone, Debug)]
pub struct LmsRun {
    /// `squared_deviation[k]` is `‖U_F s[k] - x0‖²` after `k` updates
    /// (entry 0 is the initial deviation). Truncated early on divergence.
    pub squared_deviation: Vec<f64>,
    /// State after the last recorded update.
    pub final_state: LmsState,
    /// First index `k` with `squared_deviation[k] > DIVERGENCE_THRESHOLD`,
    /// if the run blew up.
    pub diverged_at: Option<usize>,
}

/// Runs `n_iters` updates from the given initialisation, recording the
/// squared vertex-domain deviation from the truth after every update.
pub fn run(
    model: &ObservationModel,
    mu: f64,
    n_iters: usize,
    init: &InitialEstimate,
) -> Result<LmsRun> {
    if n_iters == 0 {
        return Err(Error::InvalidConfig("n_iters must be at least 1".into()));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidConfig(format!("step size must be positive, got {mu}")));
    }
    let mut state = LmsState::new(init.build(model)?, mu);
    let deviation = |s: &LmsState| {
        (s.vertex_estimate(model.band()).as_vector() - model.truth().as_vector()).norm_squared()
    };
    let mut squared_deviation = Vec::with_capacity(n_iters + 1);
    squared_deviation.push(deviation(&state));
    let mut diverged_at = None;
    for n in 0..n_iters {
        let y = model.observe(n as u64);
        state = lms_step(&state, model, &y)?;
        let d = deviation(&state);
        squared_deviation.push(d);
        if d > DIVERGENCE_THRESHOLD {
            diverged_at = Some(n + 1);
            break;
        }
    }
    Ok(LmsRun {
        squared_deviation,
        final_state: state,
        diverged_at,
    })
}
