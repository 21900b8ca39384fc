//! Joint online estimation of the full transform vector and its support.
//!
//! When the frequency support of the signal is unknown (and possibly time
//! varying), the estimator keeps a full-length coefficient vector `s` and
//! interleaves three moves per iteration:
//!
//! 1. a gradient step on the observed vertices followed by a componentwise
//!    shrinkage `T_γ` with `γ = λ·mu` (an online ISTA update),
//! 2. support re-estimation as the exact nonzero set of the new `s`,
//! 3. re-selection of the sampling set with a budget equal to the detected
//!    support size, whenever the support changed.
//!
//! Three shrinkage rules are provided; the soft (lasso) rule biases large
//! coefficients, the garotte rule shrinks them less, and the hard rule
//! passes them through untouched.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSignal;
use crate::noise;
use crate::sampling::{self, SamplerKind};
use crate::sets::{FrequencySet, SamplingSet};
use crate::spectrum::Spectrum;

/// Componentwise shrinkage rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// Soft shrinkage: subtract `γ` from the magnitude.
    Lasso,
    /// Multiply by `1 - γ²/s²`: less bias on large components.
    Garotte,
    /// Keep values with magnitude above `γ` unchanged.
    Hard,
}

impl ThresholdRule {
    /// Short stable name used in CLI output and result files.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lasso => "lasso",
            Self::Garotte => "garotte",
            Self::Hard => "hard",
        }
    }
}

/// A shrinkage rule with its positive threshold `γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdKind {
    rule: ThresholdRule,
    gamma: f64,
}

impl ThresholdKind {
    /// Pairs a rule with a threshold; `gamma` must be positive.
    pub fn new(rule: ThresholdRule, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self { rule, gamma })
    }

    /// The shrinkage rule.
    pub fn rule(&self) -> ThresholdRule {
        self.rule
    }

    /// The threshold `γ`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Applies the rule to one value. Everything with `|v| ≤ γ` collapses to an
/// exact zero for all three rules.
pub fn threshold_scalar(kind: ThresholdKind, v: f64) -> f64 {
    let g = kind.gamma;
    if v.abs() <= g {
        return 0.0;
    }
    match kind.rule {
        ThresholdRule::Lasso => v - g * v.signum(),
        ThresholdRule::Garotte => v * (1.0 - (g * g) / (v * v)),
        ThresholdRule::Hard => v,
    }
}

/// Componentwise application of [`threshold_scalar`].
pub fn threshold(kind: ThresholdKind, s: &DVector<f64>) -> DVector<f64> {
    s.map(|v| threshold_scalar(kind, v))
}

/// State of the support-learning estimator.
#[derive(Clone, Debug)]
pub struct AdaptiveState {
    s_estimate: DVector<f64>,
    support: FrequencySet,
    sampling: SamplingSet,
    mu: f64,
    lambda: f64,
}

/// What happened during one [`adaptive_step`].
#[derive(Clone, Copy, Debug, Default)]
pub struct StepInfo {
    /// The detected support differs from the previous iteration's.
    pub support_changed: bool,
    /// Thresholding removed every component; the previous support and
    /// sampling set were retained (see [`adaptive_step`]).
    pub empty_support: bool,
}

impl AdaptiveState {
    /// Fresh state: coefficients drawn uniformly from `[-1, 1]` with the
    /// given seed, every vertex sampled, support as detected from the draw
    /// (which is the full set except for measure-zero draws).
    pub fn init(spectrum: &Spectrum, mu: f64, lambda: f64, seed: u64) -> Result<Self> {
        let n = spectrum.n();
        let s = DVector::from_vec(noise::uniform_vector(seed, n, -1.0, 1.0));
        Self::from_parts(s, SamplingSet::all(n), mu, lambda)
    }

    /// Builds a state from explicit coefficients and sampling set; the
    /// support is derived as the exact nonzero set of `s_estimate`.
    pub fn from_parts(
        s_estimate: DVector<f64>,
        sampling: SamplingSet,
        mu: f64,
        lambda: f64,
    ) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive, got {mu}"
            )));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sparsity weight must be positive, got {lambda}"
            )));
        }
        let n = s_estimate.len();
        let support = nonzero_set(&s_estimate, n)?;
        Ok(Self {
            s_estimate,
            support,
            sampling,
            mu,
            lambda,
        })
    }

    /// Current full-length coefficient estimate `s[n]`.
    pub fn s_estimate(&self) -> &DVector<f64> {
        &self.s_estimate
    }

    /// Detected frequency support `F[n]`.
    pub fn support(&self) -> &FrequencySet {
        &self.support
    }

    /// Current sampling set `D[n]`.
    pub fn sampling(&self) -> &SamplingSet {
        &self.sampling
    }

    /// Step size `mu`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Sparsity weight `λ`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Shrinkage threshold `γ = λ·mu`.
    pub fn gamma(&self) -> f64 {
        self.lambda * self.mu
    }

    /// Vertex-domain estimate `U s[n]`.
    pub fn vertex_estimate(&self, spectrum: &Spectrum) -> Result<GraphSignal> {
        spectrum.inverse_gft(&self.s_estimate)
    }
}

fn nonzero_set(s: &DVector<f64>, n: usize) -> Result<FrequencySet> {
    FrequencySet::new(
        s.iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect(),
        n,
    )
}

/// One iteration of the support-learning estimator.
///
/// Performs the shrunk gradient step, recomputes the support, and when the
/// support changed re-selects the sampling set with `strategy` using a
/// budget of `|support|` vertices (`noise_var` is consulted only by the
/// deviation-minimising strategy). If shrinkage kills every component the
/// previous support and sampling set are retained and the step is flagged,
/// so iteration can continue.
pub fn adaptive_step(
    state: &AdaptiveState,
    spectrum: &Spectrum,
    y: &GraphSignal,
    kind: ThresholdRule,
    strategy: &SamplerKind,
    noise_var: &DVector<f64>,
) -> Result<(AdaptiveState, StepInfo)> {
    let n = spectrum.n();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if state.s_estimate.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: state.s_estimate.len(),
        });
    }

    let predicted = spectrum.inverse_gft(&state.s_estimate)?;
    let mut masked = DVector::zeros(n);
    for &i in state.sampling.indices() {
        masked[i] = y[i] - predicted[i];
    }
    let gradient = spectrum.basis().transpose() * masked;
    let shrink = ThresholdKind::new(kind, state.gamma())?;
    let s_new = threshold(shrink, &(&state.s_estimate + state.mu * gradient));
    let support_new = nonzero_set(&s_new, n)?;

    if support_new.is_empty() {
        return Ok((
            AdaptiveState {
                s_estimate: s_new,
                support: state.support.clone(),
                sampling: state.sampling.clone(),
                mu: state.mu,
                lambda: state.lambda,
            },
            StepInfo {
                support_changed: false,
                empty_support: true,
            },
        ));
    }

    let support_changed = support_new != state.support;
    let sampling = if support_changed {
        sampling::select(
            strategy,
            spectrum,
            &support_new,
            noise_var,
            state.mu,
            support_new.len(),
        )?
    } else {
        state.sampling.clone()
    };
    Ok((
        AdaptiveState {
            s_estimate: s_new,
            support: support_new,
            sampling,
            mu: state.mu,
            lambda: state.lambda,
        },
        StepInfo {
            support_changed,
            empty_support: false,
        },
    ))
}

/// Normalised squared deviation `‖est - truth‖² / ‖truth‖²`.
pub fn nmsd(estimate: &DVector<f64>, truth: &DVector<f64>) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    let denom = truth.norm_squared();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((estimate - truth).norm_squared() / denom)
}
