//! Canned Monte Carlo experiments: JSON configuration, trial orchestration,
//! and CSV emission.
//!
//! Each experiment is identified by a short id, comes with a fully resolved
//! built-in configuration, and writes one or more CSV tables plus a
//! `manifest.json` recording the resolved config and derived quantities.
//! Reruns with the same config produce bit-identical files: trials use
//! per-index seed substreams and are gathered in index order, so the output
//! does not depend on scheduling.

mod benchmark;
mod runners;

pub use benchmark::{
    benchmark, benchmark_graph, benchmark_noise, default_cartography, random_set_seed,
    trial_init_seed, trial_noise_seed, Benchmark, BENCHMARK_BANDWIDTH, BENCHMARK_GRAPH_SEED,
    BENCHMARK_NODES, BENCHMARK_NOISE_MAX, BENCHMARK_NOISE_SEED, BENCHMARK_SAMPLES,
    BENCHMARK_STEP, CARTO_NODES, CARTO_NOISE_VAR, CARTO_SCENARIO_SEED,
};
pub use runners::{per_vertex_steady_errors, run_adaptive_trial, AdaptiveTrial};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::adaptive::ThresholdRule;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::msd::TheoryModel;
use crate::par;
use crate::sampling::SamplerKind;
use crate::scenario::CartographyScenario;

/// Relative tolerance of the step-size bisection in
/// [`tune_step_for_target_msd`].
pub const TUNE_RELATIVE_TOL: f64 = 1e-6;

/// Identifiers of the built-in experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    /// Per-vertex steady-state deviation, closed form next to simulation.
    Fig2,
    /// Transient deviation for growing sampling budgets, step sizes tuned
    /// to a common steady-state level.
    Fig3,
    /// Closed-form steady-state deviation per sampling strategy and budget.
    Fig4,
    /// Transient deviation when the estimator's basis comes from a graph
    /// with one link removed.
    Fig5,
    /// Support-learning estimator traces per thresholding rule.
    Adaptive,
    /// Cartography: steady normalised deviation over (bandwidth, budget).
    CartoNmsdVsSamples,
    /// Cartography: normalised deviation traces while transmitters switch.
    CartoTracking,
}

impl ExperimentId {
    /// Every built-in id, in presentation order.
    pub fn all() -> [ExperimentId; 7] {
        [
            Self::Fig2,
            Self::Fig3,
            Self::Fig4,
            Self::Fig5,
            Self::Adaptive,
            Self::CartoNmsdVsSamples,
            Self::CartoTracking,
        ]
    }

    /// The id string used in configs and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Adaptive => "adaptive",
            Self::CartoNmsdVsSamples => "carto_nmsd_vs_samples",
            Self::CartoTracking => "carto_tracking",
        }
    }

    /// One-line summary for `--list-experiments`.
    pub fn summary(&self) -> &'static str {
        match self {
            Self::Fig2 => "per-vertex steady deviation: theory vs simulation",
            Self::Fig3 => "transient deviation per sampling budget, tuned steps",
            Self::Fig4 => "steady deviation per sampling strategy and budget",
            Self::Fig5 => "transient deviation under one removed link",
            Self::Adaptive => "support-learning traces per thresholding rule",
            Self::CartoNmsdVsSamples => "cartography steady error vs budget",
            Self::CartoTracking => "cartography tracking under a power schedule",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::all()
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment id {s:?}")))
    }
}

/// Where the graph under study comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// Seeded random geometric graph with the automatic connection radius.
    Generated { n: usize, seed: u64 },
    /// Graph loaded from a JSON file.
    File { path: PathBuf },
}

impl Default for GraphSource {
    fn default() -> Self {
        Self::Generated {
            n: BENCHMARK_NODES,
            seed: BENCHMARK_GRAPH_SEED,
        }
    }
}

impl GraphSource {
    /// Materialises the graph.
    pub fn build(&self) -> Result<Graph> {
        match self {
            Self::Generated { n, seed } => benchmark_graph(*seed, *n),
            Self::File { path } => Graph::load_json(path),
        }
    }
}

/// Per-vertex observation noise variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// Variances drawn once, uniformly from `[0, max)`, from `seed`.
    UniformRange { max: f64, seed: u64 },
    /// The same variance at every vertex.
    Constant { var: f64 },
    /// Explicit variance list, one entry per vertex.
    PerVertex { values: Vec<f64> },
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self::UniformRange {
            max: BENCHMARK_NOISE_MAX,
            seed: BENCHMARK_NOISE_SEED,
        }
    }
}

impl NoiseSpec {
    /// Materialises the variance vector for an `n`-vertex graph.
    pub fn build(&self, n: usize) -> Result<DVector<f64>> {
        let values = match self {
            Self::UniformRange { max, seed } => {
                if !(max.is_finite() && *max >= 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "noise range bound must be nonnegative, got {max}"
                    )));
                }
                if *max == 0.0 {
                    vec![0.0; n]
                } else {
                    crate::noise::uniform_vector(*seed, n, 0.0, *max)
                }
            }
            Self::Constant { var } => vec![*var; n],
            Self::PerVertex { values } => values.clone(),
        };
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "noise variance at vertex {i} is {v}"
                )));
            }
        }
        Ok(DVector::from_vec(values))
    }
}

/// Where a cartography scenario comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSource {
    /// The frozen two-transmitter scenario.
    #[default]
    Builtin,
    /// Scenario loaded from a JSON config file.
    File { path: PathBuf },
}

impl ScenarioSource {
    /// Materialises the scenario.
    pub fn build(&self) -> Result<CartographyScenario> {
        match self {
            Self::Builtin => default_cartography(),
            Self::File { path } => CartographyScenario::load_json(path),
        }
    }
}

/// One phase of the support-learning protocol: the true signal occupies the
/// `bandwidth` lowest frequencies for `len` iterations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub len: usize,
    pub bandwidth: usize,
}

/// Settings specific to the support-learning experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveSection {
    /// Sparsity weight λ; the shrinkage threshold is λ·μ.
    pub lambda: f64,
    /// Thresholding rules to trace, one CSV group each.
    pub rules: Vec<ThresholdRule>,
    /// Strategy used to re-select the sampling set on support changes.
    pub strategy: SamplerKind,
    /// True-support schedule.
    pub segments: Vec<SegmentSpec>,
}

impl Default for AdaptiveSection {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            rules: vec![
                ThresholdRule::Lasso,
                ThresholdRule::Garotte,
                ThresholdRule::Hard,
            ],
            strategy: SamplerKind::MaxDet,
            segments: vec![
                SegmentSpec { len: 100, bandwidth: 5 },
                SegmentSpec { len: 100, bandwidth: 15 },
                SegmentSpec { len: 100, bandwidth: 10 },
            ],
        }
    }
}

/// Full description of one experiment run.
///
/// Every field except `experiment` has a default; zero or empty means "use
/// the experiment's built-in value", filled in by [`ExperimentConfig::resolve`].
/// Fields irrelevant to the selected experiment are ignored (the cartography
/// runs take their graph and noise from the scenario, for example).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub graph: GraphSource,
    /// Band cardinality; the band is always the lowest frequencies.
    #[serde(default)]
    pub bandwidth: usize,
    /// Bandwidths swept by the cartography experiments.
    #[serde(default)]
    pub bandwidth_sweep: Vec<usize>,
    /// Sampling strategy for experiments with a single strategy.
    #[serde(default)]
    pub sampler: SamplerKind,
    /// Sampling budgets; a single entry for the fixed-budget experiments,
    /// a sweep list otherwise.
    #[serde(default)]
    pub samples: Vec<usize>,
    /// Reference step size μ.
    #[serde(default)]
    pub step_size: f64,
    /// Observation noise; `null` selects the experiment's default (constant
    /// 4e-4 for the support-learning run, the seeded uniform draw elsewhere).
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub n_trials: usize,
    #[serde(default)]
    pub n_iters: usize,
    /// First trace index of the steady-state window; defaults to
    /// `n_iters - steady_window`.
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub steady_window: usize,
    /// Root seed; all per-trial streams derive from it.
    #[serde(default)]
    pub master_seed: u64,
    /// Links removed from the estimator's graph (basis-mismatch experiment);
    /// empty means four picks spread over the measured perturbation range.
    #[serde(default)]
    pub removed_links: Vec<[usize; 2]>,
    #[serde(default)]
    pub adaptive: AdaptiveSection,
    #[serde(default)]
    pub scenario: ScenarioSource,
}

impl ExperimentConfig {
    /// The fully resolved built-in configuration for `id`.
    pub fn builtin(id: ExperimentId) -> Self {
        Self {
            experiment: id,
            graph: GraphSource::default(),
            bandwidth: 0,
            bandwidth_sweep: Vec::new(),
            sampler: SamplerKind::default(),
            samples: Vec::new(),
            step_size: 0.0,
            noise: None,
            n_trials: 0,
            n_iters: 0,
            burn_in: None,
            steady_window: 0,
            master_seed: 0,
            removed_links: Vec::new(),
            adaptive: AdaptiveSection::default(),
            scenario: ScenarioSource::default(),
        }
        .resolve()
        .expect("built-in configs are valid")
    }

    /// Fills per-experiment defaults and validates the result.
    pub fn resolve(mut self) -> Result<Self> {
        use ExperimentId::*;
        if self.step_size == 0.0 {
            self.step_size = BENCHMARK_STEP;
        }
        if self.steady_window == 0 {
            self.steady_window = 100;
        }
        if self.bandwidth == 0 {
            self.bandwidth = BENCHMARK_BANDWIDTH;
        }
        if self.noise.is_none() {
            self.noise = Some(match self.experiment {
                Adaptive => NoiseSpec::Constant { var: 4e-4 },
                _ => NoiseSpec::default(),
            });
        }
        if self.n_trials == 0 {
            self.n_trials = match self.experiment {
                Fig2 | Fig4 | CartoNmsdVsSamples | CartoTracking => 200,
                Fig3 | Fig5 | Adaptive => 100,
            };
        }
        if self.samples.is_empty() {
            self.samples = match self.experiment {
                Fig2 | Fig5 => vec![BENCHMARK_SAMPLES],
                Fig3 => vec![10, 20, 30, 40, 50],
                Fig4 => vec![10, 15, 20, 25, 30, 35, 40, 45, 50],
                Adaptive => Vec::new(),
                CartoNmsdVsSamples => vec![5, 10, 15, 20, 25, 30, 35, 40, 50, 60],
                CartoTracking => vec![15, 25, 35],
            };
        }
        if self.bandwidth_sweep.is_empty()
            && matches!(self.experiment, CartoNmsdVsSamples | CartoTracking)
        {
            self.bandwidth_sweep = vec![10, 20, 30];
        }
        if self.n_iters == 0 {
            self.n_iters = match self.experiment {
                Fig2 => 600,
                Fig3 | Fig5 => 300,
                Fig4 => 600, // unused: the table is closed-form
                Adaptive => self.adaptive.segments.iter().map(|s| s.len).sum(),
                CartoNmsdVsSamples | CartoTracking => 400,
            };
        }
        if self.burn_in.is_none() {
            self.burn_in = Some(self.n_iters.saturating_sub(self.steady_window));
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        use ExperimentId::*;
        fn bad(msg: String) -> Result<()> {
            Err(Error::InvalidConfig(msg))
        }
        if self.n_trials == 0 {
            return bad("n_trials must be at least 1".into());
        }
        if self.n_iters == 0 {
            return bad("n_iters must be at least 1".into());
        }
        let burn_in = self.burn_in.unwrap_or(0);
        if burn_in + self.steady_window > self.n_iters {
            return bad(format!(
                "burn_in {} + steady_window {} exceeds n_iters {}",
                burn_in, self.steady_window, self.n_iters
            ));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return bad(format!("step size must be positive, got {}", self.step_size));
        }
        if self.experiment != Adaptive && self.samples.contains(&0) {
            return bad("sampling budgets must be at least 1".into());
        }
        match self.experiment {
            Adaptive => {
                let a = &self.adaptive;
                if a.segments.is_empty() {
                    return bad("the support schedule needs at least one segment".into());
                }
                if a.segments.iter().any(|s| s.len == 0 || s.bandwidth == 0) {
                    return bad("schedule segments need positive length and bandwidth".into());
                }
                if a.rules.is_empty() {
                    return bad("at least one thresholding rule is required".into());
                }
                if !(a.lambda.is_finite() && a.lambda > 0.0) {
                    return bad(format!("sparsity weight must be positive, got {}", a.lambda));
                }
                let total: usize = a.segments.iter().map(|s| s.len).sum();
                if self.n_iters != total {
                    return bad(format!(
                        "n_iters {} does not match the schedule total {total}",
                        self.n_iters
                    ));
                }
            }
            CartoNmsdVsSamples | CartoTracking => {
                if self.bandwidth_sweep.is_empty() {
                    return bad("bandwidth_sweep must not be empty".into());
                }
                if self.bandwidth_sweep.contains(&0) {
                    return bad("swept bandwidths must be at least 1".into());
                }
                if self.experiment == CartoTracking
                    && self.bandwidth_sweep.len() != self.samples.len()
                {
                    return bad(format!(
                        "tracking pairs bandwidths with budgets: got {} bandwidths, {} budgets",
                        self.bandwidth_sweep.len(),
                        self.samples.len()
                    ));
                }
            }
            Fig2 | Fig3 | Fig4 | Fig5 => {
                if self.bandwidth == 0 {
                    return bad("bandwidth must be at least 1".into());
                }
                if self.samples.is_empty() {
                    return bad("at least one sampling budget is required".into());
                }
            }
        }
        Ok(())
    }

    /// Serialises the config as pretty JSON.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialisation")
    }

    /// Parses a config from JSON. Unknown fields are rejected.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        Ok(cfg)
    }

    /// Reads a config from `path`.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// What [`run_experiment`] wrote.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    /// Output directory.
    pub dir: PathBuf,
    /// Every file written, manifest first, tables in emission order.
    pub files: Vec<PathBuf>,
}

/// Runs one configured experiment, writing its tables and manifest under
/// `out_dir` (created if missing).
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: impl AsRef<Path>) -> Result<ExperimentOutput> {
    let cfg = cfg.clone().resolve()?;
    let dir = out_dir.as_ref().to_path_buf();
    std::fs::create_dir_all(&dir)?;
    let (tables, extras) = match cfg.experiment {
        ExperimentId::Fig2 => runners::fig2(&cfg)?,
        ExperimentId::Fig3 => runners::fig3(&cfg)?,
        ExperimentId::Fig4 => runners::fig4(&cfg)?,
        ExperimentId::Fig5 => runners::fig5(&cfg)?,
        ExperimentId::Adaptive => runners::adaptive(&cfg)?,
        ExperimentId::CartoNmsdVsSamples => runners::carto_nmsd(&cfg)?,
        ExperimentId::CartoTracking => runners::carto_tracking(&cfg)?,
    };

    #[derive(Serialize)]
    struct Manifest<'a> {
        config: &'a ExperimentConfig,
        derived: &'a serde_json::Map<String, serde_json::Value>,
    }
    let manifest = serde_json::to_string_pretty(&Manifest {
        config: &cfg,
        derived: &extras,
    })
    .expect("manifest serialisation");

    let mut files = Vec::with_capacity(tables.len() + 1);
    let manifest_path = dir.join("manifest.json");
    std::fs::write(&manifest_path, manifest + "\n")?;
    files.push(manifest_path);
    for t in tables {
        let path = dir.join(t.name);
        let mut body = String::with_capacity(t.rows.len() * 24 + 64);
        body.push_str(t.header);
        body.push('\n');
        for row in &t.rows {
            body.push_str(row);
            body.push('\n');
        }
        std::fs::write(&path, body)?;
        files.push(path);
    }
    Ok(ExperimentOutput { dir, files })
}

/// Runs `n_trials` independent trials, parallel when the `parallel` feature
/// is on. Results come back in trial order either way.
pub fn run_trials<T, F>(n_trials: usize, trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    par::map_indexed(n_trials, trial)
}

/// Always-sequential twin of [`run_trials`].
pub fn run_trials_serial<T, F>(n_trials: usize, trial: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    par::map_indexed_serial(n_trials, trial)
}

/// Mean of `trace[burn_in..burn_in + window]`.
///
/// `trace[k]` is understood as the squared deviation after `k` updates, so
/// with `burn_in = n_iters - window` this averages the final `window`
/// recorded updates of an `n_iters`-step run.
pub fn steady_state_average(trace: &[f64], burn_in: usize, window: usize) -> Result<f64> {
    if window == 0 {
        return Err(Error::InvalidConfig("window must be at least 1".into()));
    }
    let end = burn_in
        .checked_add(window)
        .filter(|&e| e <= trace.len())
        .ok_or_else(|| {
            Error::InvalidConfig(format!(
                "window [{burn_in}, {burn_in}+{window}) exceeds trace length {}",
                trace.len()
            ))
        })?;
    Ok(trace[burn_in..end].iter().sum::<f64>() / window as f64)
}

/// Finds the step size whose closed-form steady-state deviation equals
/// `target`, by bisection over the stable range `(0, 2/λ_max)`.
///
/// `model` supplies the sampled Gram and noise-shaping matrices; its own
/// step size is ignored. The Gram matrix must be full rank (otherwise no
/// step size gives a finite steady state). Converges to
/// [`TUNE_RELATIVE_TOL`] relative error on the target.
pub fn tune_step_for_target_msd(model: &TheoryModel, target: f64) -> Result<f64> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::UnachievableTarget(format!(
            "target deviation must be positive and finite, got {target}"
        )));
    }
    let f = model.bandwidth();
    if f == 0 {
        return Err(Error::EmptyBandEnergy);
    }
    let eig = linalg::sym_eigen(model.gram_matrix())?;
    let a_max = eig.values[f - 1];
    if a_max <= 0.0 {
        return Err(Error::EmptyBandEnergy);
    }
    if eig.values[0] <= crate::sampling::RANK_RELATIVE_CUTOFF * a_max {
        return Err(Error::UnachievableTarget(
            "the sampled Gram matrix is rank deficient; no step size converges".into(),
        ));
    }
    // Noise power per Gram eigenvector; the steady-state deviation is
    // sum_k mu * p_k / (a_k * (2 - mu * a_k)), strictly increasing in mu on
    // the stable range, so bisection is well posed.
    let p: Vec<f64> = (0..f)
        .map(|k| {
            let v = eig.vectors.column(k);
            (v.transpose() * model.g_matrix() * v)[(0, 0)]
        })
        .collect();
    let msd_at = |mu: f64| -> f64 {
        (0..f)
            .map(|k| mu * p[k] / (eig.values[k] * (2.0 - mu * eig.values[k])))
            .sum()
    };
    let mut lo = 0.0_f64;
    let mut hi = 2.0 / a_max * (1.0 - 1e-9);
    if msd_at(hi) < target {
        return Err(Error::UnachievableTarget(format!(
            "target deviation {target} is above the reachable range"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let value = msd_at(mid);
        if (value - target).abs() <= TUNE_RELATIVE_TOL * target {
            return Ok(mid);
        }
        if value < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::UnachievableTarget(format!(
        "bisection did not reach the target deviation {target}"
    )))
}
