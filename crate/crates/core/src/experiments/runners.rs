//! One function per built-in experiment, plus the reusable trial loops.
//!
//! Runners receive a resolved config, fan trials out with
//! [`super::run_trials`], and return CSV tables together with derived
//! quantities for the manifest. All randomness is derived from the master
//! seed through the per-trial substream helpers, so outputs are
//! reproducible bit for bit.

use nalgebra::DVector;
use serde_json::{json, Map, Value};

use super::{
    random_set_seed, run_trials, steady_state_average, trial_init_seed, trial_noise_seed,
    tune_step_for_target_msd, ExperimentConfig,
};
use crate::adaptive::{self, adaptive_step, AdaptiveState, ThresholdRule};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphSignal};
use crate::lms::{self, lms_step, InitialEstimate, LmsState, ObservationModel};
use crate::msd::TheoryModel;
use crate::noise;
use crate::operators::BandLimiter;
use crate::sampling::{self, SamplerKind};
use crate::scenario::{self, CartographyScenario, CoeffRule};
use crate::sets::FrequencySet;
use crate::spectrum::Spectrum;

/// One output table: fixed file name, header line, preformatted rows.
pub(super) struct Csv {
    pub name: &'static str,
    pub header: &'static str,
    pub rows: Vec<String>,
}

pub(super) type Extras = Map<String, Value>;

/// Graph, band and noise shared by the fixed-graph experiments.
struct Instance {
    graph: Graph,
    spectrum: Spectrum,
    freq: FrequencySet,
    band: BandLimiter,
    noise_var: DVector<f64>,
}

fn instance(cfg: &ExperimentConfig) -> Result<Instance> {
    let graph = cfg.graph.build()?;
    let n = graph.n_nodes();
    let spectrum = Spectrum::decompose(&graph)?;
    let freq = FrequencySet::lowest(cfg.bandwidth, n)?;
    let band = BandLimiter::new(&spectrum, freq.clone())?;
    let noise_var = resolved_noise(cfg)?.build(n)?;
    Ok(Instance {
        graph,
        spectrum,
        freq,
        band,
        noise_var,
    })
}

fn resolved_noise(cfg: &ExperimentConfig) -> Result<&super::NoiseSpec> {
    cfg.noise
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("config was not resolved".into()))
}

/// Elementwise mean of equally long traces.
fn mean_traces(traces: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = traces
        .first()
        .ok_or_else(|| Error::InvalidConfig("no trials to average".into()))?;
    let len = first.len();
    let mut mean = vec![0.0; len];
    for t in traces {
        if t.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: t.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(t) {
            *m += v;
        }
    }
    let scale = 1.0 / traces.len() as f64;
    for m in &mut mean {
        *m *= scale;
    }
    Ok(mean)
}

/// Squared-deviation trace of one run, padded with infinities when the run
/// diverged early so that traces stay aligned across trials.
fn padded_trace(run: lms::LmsRun, n_iters: usize) -> Vec<f64> {
    let mut trace = run.squared_deviation;
    trace.resize(n_iters + 1, f64::INFINITY);
    trace
}

fn set_value(indices: &[usize]) -> Value {
    json!(indices)
}

/// Mean per-vertex squared deviation over the steady-state window
/// `[burn_in, burn_in + window)` (trace index k = after k updates) of one
/// estimation run.
pub fn per_vertex_steady_errors(
    model: &ObservationModel,
    mu: f64,
    n_iters: usize,
    burn_in: usize,
    window: usize,
    init: &InitialEstimate,
) -> Result<DVector<f64>> {
    if window == 0 {
        return Err(Error::InvalidConfig("window must be at least 1".into()));
    }
    if burn_in + window > n_iters + 1 {
        return Err(Error::InvalidConfig(format!(
            "window [{burn_in}, {}) exceeds the {n_iters}-step run",
            burn_in + window
        )));
    }
    let n = model.band().n();
    let mut state = LmsState::new(init.build(model)?, mu);
    let mut acc = DVector::zeros(n);
    let in_window = |k: usize| k >= burn_in && k < burn_in + window;
    if in_window(0) {
        let diff = state.vertex_estimate(model.band()).as_vector() - model.truth().as_vector();
        acc += diff.component_mul(&diff);
    }
    for iter in 0..n_iters {
        let y = model.observe(iter as u64);
        state = lms_step(&state, model, &y)?;
        if in_window(state.iteration()) {
            let diff =
                state.vertex_estimate(model.band()).as_vector() - model.truth().as_vector();
            acc += diff.component_mul(&diff);
        }
    }
    Ok(acc / window as f64)
}

/// Per-vertex steady deviation, closed form next to simulation.
pub(super) fn fig2(cfg: &ExperimentConfig) -> Result<(Vec<Csv>, Extras)> {
    let inst = instance(cfg)?;
    let n = inst.graph.n_nodes();
    let m = cfg.samples[0];
    let sampling = sampling::select(
        &cfg.sampler,
        &inst.spectrum,
        &inst.freq,
        &inst.noise_var,
        cfg.step_size,
        m,
    )?;
    let truth = scenario::bandlimited_test_signal(&inst.spectrum, &inst.freq, CoeffRule::Unit)?;
    let theory = TheoryModel::from_band(&inst.band, &sampling, &inst.noise_var, cfg.step_size)?;
    let theory_k = theory.per_vertex_msd_all()?;
    let theory_total = theory.steady_state_msd()?;

    let burn_in = cfg.burn_in.unwrap_or(0);
    let window = cfg.steady_window;
    let trials: Result<Vec<DVector<f64>>> = run_trials(cfg.n_trials, |t| {
        let model = ObservationModel::new(
            inst.band.clone(),
            sampling.clone(),
            truth.clone(),
            inst.noise_var.clone(),
            trial_noise_seed(cfg.master_seed, t),
        )?;
        per_vertex_steady_errors(
            &model,
            cfg.step_size,
            cfg.n_iters,
            burn_in,
            window,
            &InitialEstimate::Seeded {
                seed: trial_init_seed(cfg.master_seed, t),
            },
        )
    })
    .into_iter()
    .collect();
    let trials = trials?;
    let mut sim_k = DVector::zeros(n);
    for t in &trials {
        sim_k += t;
    }
    sim_k /= cfg.n_trials as f64;

    let rows = (0..n)
        .map(|k| format!("{k},{},{}", theory_k[k], sim_k[k]))
        .collect();
    let gap = (0..n)
        .map(|k| (sim_k[k] - theory_k[k]).abs() / theory_k[k])
        .sum::<f64>()
        / n as f64;
    let mut extras = Extras::new();
    extras.insert("sampling_set".into(), set_value(sampling.indices()));
    extras.insert("theory_msd".into(), json!(theory_total));
    extras.insert("sim_msd".into(), json!(sim_k.sum()));
    extras.insert("mean_relative_gap".into(), json!(gap));
    Ok((
        vec![Csv {
            name: "fig2_per_vertex.csv",
            header: "vertex,theory_msd,sim_msd",
            rows,
        }],
        extras,
    ))
}

/// Transient deviation per sampling budget, steps tuned to one steady level.
pub(super) fn fig3(cfg: &ExperimentConfig) -> Result<(Vec<Csv>, Extras)> {
    let inst = instance(cfg)?;
    let truth = scenario::bandlimited_test_signal(&inst.spectrum, &inst.freq, CoeffRule::Unit)?;
    let reference_m = cfg.samples[0];
    let reference_set = sampling::select(
        &cfg.sampler,
        &inst.spectrum,
        &inst.freq,
        &inst.noise_var,
        cfg.step_size,
        reference_m,
    )?;
    let target = TheoryModel::from_band(&inst.band, &reference_set, &inst.noise_var, cfg.step_size)?
        .steady_state_msd()?;

    let mut rows = Vec::new();
    let mut tuned = Extras::new();
    for &m in &cfg.samples {
        let set = sampling::select(
            &cfg.sampler,
            &inst.spectrum,
            &inst.freq,
            &inst.noise_var,
            cfg.step_size,
            m,
        )?;
        let mu = if m == reference_m {
            cfg.step_size
        } else {
            let probe = TheoryModel::from_band(&inst.band, &set, &inst.noise_var, cfg.step_size)?;
            tune_step_for_target_msd(&probe, target)?
        };
        tuned.insert(m.to_string(), json!(mu));
        let traces: Result<Vec<Vec<f64>>> = run_trials(cfg.n_trials, |t| {
            let model = ObservationModel::new(
                inst.band.clone(),
                set.clone(),
                truth.clone(),
                inst.noise_var.clone(),
                trial_noise_seed(cfg.master_seed, t),
            )?;
            let run = lms::run(
                &model,
                mu,
                cfg.n_iters,
                &InitialEstimate::Seeded {
                    seed: trial_init_seed(cfg.master_seed, t),
                },
            )?;
            Ok(padded_trace(run, cfg.n_iters))
        })
        .into_iter()
        .collect();
        let mean = mean_traces(&traces?)?;
        rows.extend(
            mean.iter()
                .enumerate()
                .map(|(k, v)| format!("{m},{k},{v}")),
        );
    }
    let mut extras = Extras::new();
    extras.insert("target_msd".into(), json!(target));
    extras.insert("tuned_step_sizes".into(), Value::Object(tuned));
    Ok((
        vec![Csv {
            name: "fig3_transient.csv",
            header: "samples,iteration,mean_squared_deviation",
            rows,
        }],
        extras,
    ))
}

/// Closed-form steady deviation per strategy and budget; the random
/// strategy reports the median over seeded draws.
pub(super) fn fig4(cfg: &ExperimentConfig) -> Result<(Vec<Csv>, Extras)> {
    let inst = instance(cfg)?;
    let n = inst.graph.n_nodes();
    let steady_or_inf = |set: &crate::sets::SamplingSet| -> Result<f64> {
        let model = TheoryModel::from_band(&inst.band, set, &inst.noise_var, cfg.step_size)?;
        match model.steady_state_msd() {
            Ok(v) => Ok(v),
            Err(Error::Unstable { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let mut rows = Vec::new();
    for kind in [
        SamplerKind::MinMsd,
        SamplerKind::MaxDet,
        SamplerKind::MaxLambdaMin,
    ] {
        for &m in &cfg.samples {
            let set = sampling::select(
                &kind,
                &inst.spectrum,
                &inst.freq,
                &inst.noise_var,
                cfg.step_size,
                m,
            )?;
            rows.push(format!("{},{m},{}", kind.name(), steady_or_inf(&set)?));
        }
    }
    let mut unstable_counts = Extras::new();
    for &m in &cfg.samples {
        let values: Result<Vec<f64>> = run_trials(cfg.n_trials, |t| {
            let set = sampling::select_random(n, m, random_set_seed(cfg.master_seed, t))?;
            steady_or_inf(&set)
        })
        .into_iter()
        .collect();
        let mut values = values?;
        values.sort_by(f64::total_cmp);
        let median = values[values.len() / 2];
        unstable_counts.insert(
            m.to_string(),
            json!(values.iter().filter(|v| !v.is_finite()).count()),
        );
        rows.push(format!("random_median,{m},{median}"));
    }
    let mut extras = Extras::new();
    extras.insert("random_draws".into(), json!(cfg.n_trials));
    extras.insert("random_unstable_draws".into(), Value::Object(unstable_counts));
    extras.insert("median".into(), json!("upper"));
    Ok((
        vec![Csv {
            name: "fig4_steady.csv",
            header: "strategy,samples,msd",
            rows,
        }],
        extras,
    ))
}

/// Ranks every edge by how much its removal perturbs the band projector and
/// returns four picks spread over the range (quartile boundaries and the
/// maximum), deduplicated for very small graphs.
fn pick_removed_links(graph: &Graph, band: &BandLimiter) -> Result<Vec<(usize, usize, f64)>> {
    let edges = graph.edges();
    if edges.is_empty() {
        return Err(Error::InvalidGraph("no links to remove".into()));
    }
    let b_true = band.matrix();
    let mut scored = Vec::with_capacity(edges.len());
    for &(i, j, _) in &edges {
        let cut = scenario::remove_link(graph, i, j)?;
        let spectrum = Spectrum::decompose(&cut)?;
        let perturbed = BandLimiter::new(&spectrum, band.freq().clone())?;
        scored.push((i, j, (perturbed.matrix() - &b_true).norm()));
    }
    scored.sort_by(|a, b| {
        a.2.total_cmp(&b.2)
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    let last = scored.len() - 1;
    let mut picks = Vec::new();
    for q in [0.25, 0.5, 0.75, 1.0] {
        let idx = (last as f64 * q).round() as usize;
        if picks.last() != Some(&idx) {
            picks.push(idx);
        }
    }
    Ok(picks.into_iter().map(|idx| scored[idx]).collect())
}

/// Transient deviation when the estimator's basis comes from a graph with
/// one link removed, next to the unperturbed closed-form steady level.
pub(super) fn fig5(cfg: &ExperimentConfig) -> Result<(Vec<Csv>, Extras)> {
    let inst = instance(cfg)?;
    let m = cfg.samples[0];
    let sampling = sampling::select(
        &cfg.sampler,
        &inst.spectrum,
        &inst.freq,
        &inst.noise_var,
        cfg.step_size,
        m,
    )?;
    let truth = scenario::bandlimited_test_signal(&inst.spectrum, &inst.freq, CoeffRule::Unit)?;
    let ideal = TheoryModel::from_band(&inst.band, &sampling, &inst.noise_var, cfg.step_size)?
        .steady_state_msd()?;

    let links: Vec<(usize, usize, f64)> = if cfg.removed_links.is_empty() {
        pick_removed_links(&inst.graph, &inst.band)?
    } else {
        let b_true = inst.band.matrix();
        let mut out = Vec::with_capacity(cfg.removed_links.len());
        for &[i, j] in &cfg.removed_links {
            let cut = scenario::remove_link(&inst.graph, i, j)?;
            let spectrum = Spectrum::decompose(&cut)?;
            let perturbed = BandLimiter::new(&spectrum, inst.freq.clone())?;
            out.push((i, j, (perturbed.matrix() - &b_true).norm()));
        }
        out
    };

    let mut rows: Vec<String> = (0..=cfg.n_iters)
        .map(|k| format!("ideal_theory,{k},{ideal}"))
        .collect();
    for &(i, j, _) in &links {
        let cut = scenario::remove_link(&inst.graph, i, j)?;
        let spectrum = Spectrum::decompose(&cut)?;
        let perturbed = BandLimiter::new(&spectrum, inst.freq.clone())?;
        let traces: Result<Vec<Vec<f64>>> = run_trials(cfg.n_trials, |t| {
            let model = ObservationModel::with_aliased_truth(
                perturbed.clone(),
                sampling.clone(),
                truth.clone(),
                inst.noise_var.clone(),
                trial_noise_seed(cfg.master_seed, t),
            )?;
            let run = lms::run(
                &model,
                cfg.step_size,
                cfg.n_iters,
                &InitialEstimate::Seeded {
                    seed: trial_init_seed(cfg.master_seed, t),
                },
            )?;
            Ok(padded_trace(run, cfg.n_iters))
        })
        .into_iter()
        .collect();
        let mean = mean_traces(&traces?)?;
        rows.extend(
            mean.iter()
                .enumerate()
                .map(|(k, v)| format!("removed_{i}_{j},{k},{v}")),
        );
    }
    let mut extras = Extras::new();
    extras.insert("ideal_msd".into(), json!(ideal));
    extras.insert("sampling_set".into(), set_value(sampling.indices()));
    extras.insert(
        "removed_links".into(),
        json!(links
            .iter()
            .map(|&(i, j, d)| json!({"i": i, "j": j, "projector_shift": d}))
            .collect::<Vec<_>>()),
    );
    Ok((
        vec![Csv {
            name: "fig5_transient.csv",
            header: "label,iteration,mean_squared_deviation",
            rows,
        }],
        extras,
    ))
}

/// Per-iteration record of one support-learning run.
#[derive(Clone, Debug)]
pub struct AdaptiveTrial {
    /// Normalised squared deviation of the coefficient estimate from the
    /// current segment's truth; entry `k` is after `k` updates.
    pub nmsd: Vec<f64>,
    /// Detected support cardinality per iteration.
    pub support_len: Vec<usize>,
    /// Sampling set per iteration.
    pub sampling_sets: Vec<Vec<usize>>,
}

/// Runs the support-learning estimator through a schedule of true supports.
///
/// Each segment holds the truth at unit coefficients on its frequency set
/// for `len` iterations. Observation noise is keyed by the global iteration
/// counter, so the draws do not depend on how the sampling set evolves.
#[allow(clippy::too_many_arguments)]
pub fn run_adaptive_trial(
    spectrum: &Spectrum,
    segments: &[(usize, FrequencySet)],
    rule: ThresholdRule,
    strategy: &SamplerKind,
    mu: f64,
    lambda: f64,
    noise_var: &DVector<f64>,
    noise_seed: u64,
    init_seed: u64,
) -> Result<AdaptiveTrial> {
    let n = spectrum.n();
    if segments.is_empty() {
        return Err(Error::InvalidConfig(
            "the support schedule needs at least one segment".into(),
        ));
    }
    if noise_var.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: noise_var.len(),
        });
    }
    let total: usize = segments.iter().map(|s| s.0).sum();
    let mut out = AdaptiveTrial {
        nmsd: Vec::with_capacity(total + 1),
        support_len: Vec::with_capacity(total + 1),
        sampling_sets: Vec::with_capacity(total + 1),
    };
    let mut state = AdaptiveState::init(spectrum, mu, lambda, init_seed)?;
    let mut iteration: u64 = 0;
    for (si, (len, freq)) in segments.iter().enumerate() {
        let s_true = DVector::from_fn(n, |i, _| if freq.contains(i) { 1.0 } else { 0.0 });
        let x_true = spectrum.inverse_gft(&s_true)?;
        if si == 0 {
            out.nmsd.push(adaptive::nmsd(state.s_estimate(), &s_true)?);
            out.support_len.push(state.support().len());
            out.sampling_sets.push(state.sampling().indices().to_vec());
        }
        for _ in 0..*len {
            let mut y = DVector::zeros(n);
            for &i in state.sampling().indices() {
                let mut v = x_true[i];
                let var = noise_var[i];
                if var > 0.0 {
                    v += var.sqrt() * noise::standard_normal_at(noise_seed, iteration, i as u64);
                }
                y[i] = v;
            }
            let (next, _) = adaptive_step(
                &state,
                spectrum,
                &GraphSignal::new(y),
                rule,
                strategy,
                noise_var,
            )?;
            state = next;
            out.nmsd.push(adaptive::nmsd(state.s_estimate(), &s_true)?);
            out.support_len.push(state.support().len());
            out.sampling_sets.push(state.sampling().indices().to_vec());
            iteration += 1;
        }
    }
    Ok(out)
}

/// Support-learning traces, one group of rows per thresholding rule.
pub(super) fn adaptive(cfg: &ExperimentConfig) -> Result<(Vec<Csv>, Extras)> {
    let graph = cfg.graph.build()?;
    let n = graph.n_nodes();
    let spectrum = Spectrum::decompose(&graph)?;
    let noise_var = resolved_noise(cfg)?.build(n)?;
    let section = &cfg.adaptive;
    let segments: Result<Vec<(usize, FrequencySet)>> = section
        .segments
        .iter()
        .map(|s| Ok((s.len, FrequencySet::lowest(s.bandwidth, n)?)))
        .collect();
    let segments = segments?;

    let mut rows = Vec::new();
    for &rule in &section.rules {
        let trials: Result<Vec<AdaptiveTrial>> = run_trials(cfg.n_trials, |t| {
            run_adaptive_trial(
                &spectrum,
                &segments,
                rule,
                &section.strategy,
                cfg.step_size,
                section.lambda,
                &noise_var,
                trial_noise_seed(cfg.master_seed, t),
                trial_init_seed(cfg.master_seed, t),
            )
        })
        .into_iter()
        .collect();
        let trials = trials?;
        let scale = 1.0 / trials.len() as f64;
        for k in 0..=cfg.n_iters {
            let nmsd = trials.iter().map(|t| t.nmsd[k]).sum::<f64>() * scale;
            let support = trials.iter().map(|t| t.support_len[k] as f64).sum::<f64>() * scale;
            rows.push(format!("{},{k},{nmsd},{support}", rule.name()));
        }
    }
    let mut extras = Extras::new();
    extras.insert("lambda".into(), json!(section.lambda));
    extras.insert("gamma".into(), json!(section.lambda * cfg.step_size));
    extras.insert("strategy".into(), json!(section.strategy.name()));
    extras.insert(
        "segments".into(),
        json!(section
            .segments
            .iter()
            .map(|s| json!({"len": s.len, "bandwidth": s.bandwidth}))
            .collect::<Vec<_>>()),
    );
    Ok((
        vec![Csv {
            name: "adaptive_traces.csv",
            header: "rule,iteration,mean_nmsd,mean_support",
            rows,
        }],
        extras,
    ))
}

fn scenario_instance(
    cfg: &ExperimentConfig,
) -> Result<(CartographyScenario, Spectrum, DVector<f64>)> {
    let sc = cfg.scenario.build()?;
    let spectrum = Spectrum::decompose(&sc.graph())?;
    let noise_var = sc.noise_vector();
    Ok((sc, spectrum, noise_var))
}

/// Cartography steady error over the (bandwidth, budget) grid, against the
/// field of the transmitters active at the start of the schedule.
pub(super) fn carto_nmsd(cfg: &ExperimentConfig) -> Result<(Vec<Csv>, Extras)> {
    let (sc, spectrum, noise_var) = scenario_instance(cfg)?;
    let n = spectrum.n();
    let active = sc.active_at(0)?.to_vec();
    let x0 = sc.field(&active)?;
    let norm2 = x0.as_vector().norm_squared();
    if norm2 == 0.0 {
        return Err(Error::ZeroReference);
    }
    let burn_in = cfg.burn_in.unwrap_or(0);
    let window = cfg.steady_window;

    let mut rows = Vec::new();
    for &bw in &cfg.bandwidth_sweep {
        let freq = FrequencySet::lowest(bw, n)?;
        let band = BandLimiter::new(&spectrum, freq.clone())?;
        for &m in &cfg.samples {
            let set = sampling::select(
                &cfg.sampler,
                &spectrum,
                &freq,
                &noise_var,
                cfg.step_size,
                m,
            )?;
            let values: Result<Vec<f64>> = run_trials(cfg.n_trials, |t| {
                let model = ObservationModel::with_aliased_truth(
                    band.clone(),
                    set.clone(),
                    x0.clone(),
                    noise_var.clone(),
                    trial_noise_seed(cfg.master_seed, t),
                )?;
                let run = lms::run(&model, cfg.step_size, cfg.n_iters, &InitialEstimate::Zero)?;
                if run.diverged_at.is_some() {
                    return Ok(f64::INFINITY);
                }
                Ok(steady_state_average(&run.squared_deviation, burn_in, window)? / norm2)
            })
            .into_iter()
            .collect();
            let values = values?;
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            rows.push(format!("{bw},{m},{mean}"));
        }
    }
    let mut extras = Extras::new();
    extras.insert("active_transmitters".into(), json!(active));
    extras.insert("radius".into(), json!(sc.config().radius));
    extras.insert("truth_norm_squared".into(), json!(norm2));
    Ok((
        vec![Csv {
            name: "carto_nmsd.csv",
            header: "bandwidth,samples,steady_nmsd",
            rows,
        }],
        extras,
    ))
}

/// Normalised deviation trace of one tracking run under the scenario's
/// transmitter schedule.
fn track_trial(
    sc: &CartographyScenario,
    band: &BandLimiter,
    set: &crate::sets::SamplingSet,
    noise_var: &DVector<f64>,
    mu: f64,
    n_iters: usize,
    noise_seed: u64,
) -> Result<Vec<f64>> {
    let mut state = LmsState::zeros(band.bandwidth(), mu);
    let mut out = Vec::with_capacity(n_iters + 1);
    for entry in &sc.config().schedule {
        if entry.from >= n_iters {
            break;
        }
        let x = sc.field(&entry.active)?;
        let norm2 = x.as_vector().norm_squared();
        if norm2 == 0.0 {
            return Err(Error::ZeroReference);
        }
        let model = ObservationModel::with_aliased_truth(
            band.clone(),
            set.clone(),
            x.clone(),
            noise_var.clone(),
            noise_seed,
        )?;
        let nmsd_now = |s: &LmsState| {
            (s.vertex_estimate(band).as_vector() - x.as_vector()).norm_squared() / norm2
        };
        if entry.from == 0 {
            out.push(nmsd_now(&state));
        }
        for iter in entry.from..entry.to.min(n_iters) {
            let y = model.observe(iter as u64);
            state = lms_step(&state, &model, &y)?;
            out.push(nmsd_now(&state));
        }
    }
    Ok(out)
}

/// Cartography tracking traces for paired (bandwidth, budget) settings.
pub(super) fn carto_tracking(cfg: &ExperimentConfig) -> Result<(Vec<Csv>, Extras)> {
    let (sc, spectrum, noise_var) = scenario_instance(cfg)?;
    let n = spectrum.n();
    if cfg.n_iters > sc.horizon() {
        return Err(Error::InvalidConfig(format!(
            "n_iters {} exceeds the schedule horizon {}",
            cfg.n_iters,
            sc.horizon()
        )));
    }
    let mut rows = Vec::new();
    let mut sets = Extras::new();
    for (&bw, &m) in cfg.bandwidth_sweep.iter().zip(&cfg.samples) {
        let freq = FrequencySet::lowest(bw, n)?;
        let band = BandLimiter::new(&spectrum, freq.clone())?;
        let set = sampling::select(
            &cfg.sampler,
            &spectrum,
            &freq,
            &noise_var,
            cfg.step_size,
            m,
        )?;
        sets.insert(format!("f{bw}_s{m}"), set_value(set.indices()));
        let traces: Result<Vec<Vec<f64>>> = run_trials(cfg.n_trials, |t| {
            track_trial(
                &sc,
                &band,
                &set,
                &noise_var,
                cfg.step_size,
                cfg.n_iters,
                trial_noise_seed(cfg.master_seed, t),
            )
        })
        .into_iter()
        .collect();
        let mean = mean_traces(&traces?)?;
        rows.extend(
            mean.iter()
                .enumerate()
                .map(|(k, v)| format!("{bw},{m},{k},{v}")),
        );
    }
    let mut extras = Extras::new();
    extras.insert("sampling_sets".into(), Value::Object(sets));
    extras.insert("radius".into(), json!(sc.config().radius));
    Ok((
        vec![Csv {
            name: "carto_tracking.csv",
            header: "bandwidth,samples,iteration,mean_nmsd",
            rows,
        }],
        extras,
    ))
}
