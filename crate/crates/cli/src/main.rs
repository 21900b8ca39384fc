//! Command-line front end for the graph LMS estimation library.
//!
//! Exposes graph generation, sampling-set selection, the closed-form
//! steady-state theory, single estimation runs, the support-learning
//! estimator, and the batch experiment harness. Commands print data (JSON or
//! CSV) to stdout unless `--out` redirects them to a file.
//!
//! Exit codes: 0 on success, 2 for configuration errors (bad flags, malformed
//! files, impossible requests), 3 for numerical failures (instability,
//! divergence, breakdown of a solver).

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphlms::nalgebra::DVector;

use graphlms::adaptive::ThresholdRule;
use graphlms::experiments::{
    self, ExperimentConfig, ExperimentId, GraphSource, NoiseSpec, BENCHMARK_GRAPH_SEED,
    BENCHMARK_NODES,
};
use graphlms::graph::Graph;
use graphlms::lms::{self, InitialEstimate, ObservationModel};
use graphlms::msd::TheoryModel;
use graphlms::operators::BandLimiter;
use graphlms::sampling::{self, SamplerKind};
use graphlms::scenario::{bandlimited_test_signal, CoeffRule};
use graphlms::sets::{FrequencySet, SamplingSet};
use graphlms::spectrum::Spectrum;
use graphlms::{Error, Result};

#[derive(Parser)]
#[command(name = "graphlms", version, about = "Adaptive estimation of band-limited graph signals")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate or inspect graphs.
    Graph {
        #[command(subcommand)]
        cmd: GraphCmd,
    },
    /// Select a sampling set with one of the greedy or random strategies.
    Sample(SampleArgs),
    /// Closed-form mean-square theory of the estimator.
    Theory {
        #[command(subcommand)]
        cmd: TheoryCmd,
    },
    /// Run the fixed-support estimator.
    Lms {
        #[command(subcommand)]
        cmd: LmsCmd,
    },
    /// Run the support-learning estimator.
    Adaptive {
        #[command(subcommand)]
        cmd: AdaptiveCmd,
    },
    /// Batch experiments: full protocols emitting CSV tables and a manifest.
    Experiment(ExperimentArgs),
}

/// Where the graph comes from: a JSON file, or the seeded geometric
/// generator (defaults reproduce the benchmark instance).
#[derive(Args)]
struct GraphSourceArgs {
    /// Graph file: JSON {"n": .., "edges": [[i, j, w], ..]}
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
    /// Vertex count for the generated geometric graph
    #[arg(long, default_value_t = BENCHMARK_NODES)]
    nodes: usize,
    /// Position seed for the generated geometric graph
    #[arg(long, default_value_t = BENCHMARK_GRAPH_SEED)]
    seed: u64,
}

impl GraphSourceArgs {
    fn source(&self) -> GraphSource {
        match &self.graph {
            Some(p) => GraphSource::File { path: p.clone() },
            None => GraphSource::Generated {
                n: self.nodes,
                seed: self.seed,
            },
        }
    }

    fn build(&self) -> Result<Graph> {
        self.source().build()
    }
}

/// Observation noise profile: a constant per-vertex variance, or the
/// seeded uniform benchmark profile when no variance is given.
#[derive(Args)]
struct NoiseArgs {
    /// Constant per-vertex noise variance (default: benchmark profile,
    /// seeded uniform in [0, 0.01])
    #[arg(long, value_name = "VAR")]
    noise_var: Option<f64>,
}

impl NoiseArgs {
    fn build(&self, n: usize) -> Result<DVector<f64>> {
        match self.noise_var {
            Some(var) => NoiseSpec::Constant { var }.build(n),
            None => NoiseSpec::default().build(n),
        }
    }
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Generate a random geometric graph and print it as JSON.
    Gen {
        /// Vertex count
        #[arg(long, default_value_t = BENCHMARK_NODES)]
        nodes: usize,
        /// Position seed
        #[arg(long, default_value_t = BENCHMARK_GRAPH_SEED)]
        seed: u64,
        /// Write to a file instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Print size, mean degree and connectivity of a graph.
    Info {
        #[command(flatten)]
        source: GraphSourceArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    MinMsd,
    MaxDet,
    MaxLambdaMin,
    Random,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: GraphSourceArgs,
    /// Band: the lowest-frequency set of this size
    #[arg(long, default_value_t = 10)]
    bandwidth: usize,
    /// Selection strategy
    #[arg(long, value_enum, default_value = "max-det")]
    strategy: StrategyArg,
    /// Number of vertices to select
    #[arg(long)]
    m: usize,
    /// Seed for the random strategy
    #[arg(long, default_value_t = 0)]
    random_seed: u64,
    /// Step size assumed by the deviation-minimising strategy
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Args)]
struct InstanceArgs {
    #[command(flatten)]
    source: GraphSourceArgs,
    /// Band: the lowest-frequency set of this size
    #[arg(long, default_value_t = 10)]
    bandwidth: usize,
    /// Explicit sampling set, comma-separated vertex indices
    #[arg(long, value_name = "I,J,..")]
    set: Option<String>,
    /// Strategy used to select the sampling set when --set is absent
    #[arg(long, value_enum, default_value = "max-det")]
    strategy: StrategyArg,
    /// Sampling budget when selecting by strategy (default: bandwidth)
    #[arg(long)]
    m: Option<usize>,
    /// Seed for the random strategy
    #[arg(long, default_value_t = 0)]
    random_seed: u64,
    /// Step size
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[command(flatten)]
    noise: NoiseArgs,
}

/// Everything the theory and estimator commands need, resolved.
struct Instance {
    spectrum: Spectrum,
    freq: FrequencySet,
    sampling: SamplingSet,
    noise_var: DVector<f64>,
    mu: f64,
}

impl InstanceArgs {
    fn resolve(&self) -> Result<Instance> {
        let graph = self.source.build()?;
        let n = graph.n_nodes();
        let spectrum = Spectrum::decompose(&graph)?;
        let freq = FrequencySet::lowest(self.bandwidth, n)?;
        let noise_var = self.noise.build(n)?;
        let sampling = match &self.set {
            Some(list) => SamplingSet::new(parse_index_list(list)?, n)?,
            None => {
                let m = self.m.unwrap_or(self.bandwidth);
                let kind = sampler_kind(self.strategy, self.random_seed);
                sampling::select(&kind, &spectrum, &freq, &noise_var, self.step, m)?
            }
        };
        Ok(Instance {
            spectrum,
            freq,
            sampling,
            noise_var,
            mu: self.step,
        })
    }

    fn theory(&self) -> Result<TheoryModel> {
        let inst = self.resolve()?;
        TheoryModel::build(
            &inst.spectrum,
            &inst.freq,
            &inst.sampling,
            &inst.noise_var,
            inst.mu,
        )
    }
}

#[derive(Subcommand)]
enum TheoryCmd {
    /// Steady-state mean squared deviation of the configured estimator.
    Msd {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Steady-state deviation component at one vertex.
    MsdK {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Vertex index
        #[arg(long)]
        k: usize,
    },
    /// Spectral radius of the error recursion and the stable step range.
    CheckStability {
        #[command(flatten)]
        instance: InstanceArgs,
    },
}

#[derive(Subcommand)]
enum LmsCmd {
    /// Simulate one estimation run and emit its squared-deviation trace.
    Run {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Number of updates
        #[arg(long, default_value_t = 300)]
        iters: usize,
        /// Observation-noise stream seed
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        /// Seed for the band coefficients of the true signal
        #[arg(long, default_value_t = 1)]
        signal_seed: u64,
        /// Start from seeded normal coefficients instead of zeros
        #[arg(long, value_name = "SEED", conflicts_with = "worst_amplitude")]
        init_seed: Option<u64>,
        /// Start at the truth perturbed along the slowest-mixing direction
        #[arg(long, value_name = "AMPLITUDE")]
        worst_amplitude: Option<f64>,
        /// Write the CSV here instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Lasso,
    Garotte,
    Hard,
}

#[derive(Subcommand)]
enum AdaptiveCmd {
    /// Track a schedule of true supports, learning support and coefficients.
    Run {
        #[command(flatten)]
        source: GraphSourceArgs,
        /// Shrinkage rule applied after every update
        #[arg(long, value_enum, default_value = "hard")]
        rule: RuleArg,
        /// Sparsity weight of the shrinkage rule
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        /// Step size
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        /// Constant per-vertex noise variance
        #[arg(long, default_value_t = 4e-4)]
        noise_var: f64,
        /// Re-selection strategy for the sampling set
        #[arg(long, value_enum, default_value = "max-det")]
        strategy: StrategyArg,
        /// Seed for the random re-selection strategy
        #[arg(long, default_value_t = 0)]
        random_seed: u64,
        /// True-support schedule, comma-separated LENGTH:BANDWIDTH segments
        #[arg(long, default_value = "100:5,100:15,100:10")]
        segments: String,
        /// Observation-noise stream seed
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        /// Seed of the random initial coefficients
        #[arg(long, default_value_t = 0)]
        init_seed: u64,
        /// Write the CSV here instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// List the built-in experiments and exit
    #[arg(long)]
    list_experiments: bool,
    #[command(subcommand)]
    cmd: Option<ExperimentCmd>,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Execute one experiment and write its tables under --out.
    Run {
        /// Experiment configuration (JSON). Omitted fields take the
        /// experiment's built-in defaults.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Built-in experiment id (see --list-experiments)
        #[arg(long, value_name = "ID")]
        experiment: Option<String>,
        /// Override the master seed
        #[arg(long)]
        master_seed: Option<u64>,
        /// Override the trial count
        #[arg(long)]
        trials: Option<usize>,
        /// Override the iteration count
        #[arg(long)]
        iters: Option<usize>,
        /// Output directory (default: results/<experiment id>)
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn sampler_kind(arg: StrategyArg, random_seed: u64) -> SamplerKind {
    match arg {
        StrategyArg::MinMsd => SamplerKind::MinMsd,
        StrategyArg::MaxDet => SamplerKind::MaxDet,
        StrategyArg::MaxLambdaMin => SamplerKind::MaxLambdaMin,
        StrategyArg::Random => SamplerKind::Random { seed: random_seed },
    }
}

fn threshold_rule(arg: RuleArg) -> ThresholdRule {
    match arg {
        RuleArg::Lasso => ThresholdRule::Lasso,
        RuleArg::Garotte => ThresholdRule::Garotte,
        RuleArg::Hard => ThresholdRule::Hard,
    }
}

fn parse_index_list(list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad vertex index {tok:?}")))
        })
        .collect()
}

/// Parses "LEN:BW,LEN:BW,.." into per-segment (length, lowest-BW band).
fn parse_segments(text: &str, n: usize) -> Result<Vec<(usize, FrequencySet)>> {
    text.split(',')
        .map(|tok| {
            let (len, bw) = tok
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::InvalidConfig(format!("bad segment {tok:?}, want LEN:BW")))?;
            let len: usize = len
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad segment length {len:?}")))?;
            let bw: usize = bw
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad segment bandwidth {bw:?}")))?;
            Ok((len, FrequencySet::lowest(bw, n)?))
        })
        .collect()
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn graph_cmd(cmd: GraphCmd) -> Result<ExitCode> {
    match cmd {
        GraphCmd::Gen { nodes, seed, out } => {
            let g = experiments::benchmark_graph(seed, nodes)?;
            emit(out.as_ref(), &(g.to_json_string() + "\n"))?;
        }
        GraphCmd::Info { source } => {
            let g = source.build()?;
            let n = g.n_nodes();
            let edges = g.edges().len();
            let info = serde_json::json!({
                "n": n,
                "edges": edges,
                "mean_degree": 2.0 * edges as f64 / n as f64,
                "connected": g.is_connected(),
            });
            println!("{info}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sample_cmd(args: SampleArgs) -> Result<ExitCode> {
    let graph = args.source.build()?;
    let n = graph.n_nodes();
    let spectrum = Spectrum::decompose(&graph)?;
    let freq = FrequencySet::lowest(args.bandwidth, n)?;
    let noise_var = args.noise.build(n)?;
    let kind = sampler_kind(args.strategy, args.random_seed);
    let set = sampling::select(&kind, &spectrum, &freq, &noise_var, args.step, args.m)?;
    let band = BandLimiter::new(&spectrum, freq)?;
    let result = serde_json::json!({
        "strategy": kind.name(),
        "m": set.len(),
        "indices": set.indices(),
        "reconstruction_gap": graphlms::operators::dbar_b_norm(&set, &band),
    });
    println!("{result}");
    Ok(ExitCode::SUCCESS)
}

fn theory_cmd(cmd: TheoryCmd) -> Result<ExitCode> {
    match cmd {
        TheoryCmd::Msd { instance } => {
            println!("{}", instance.theory()?.steady_state_msd()?);
        }
        TheoryCmd::MsdK { instance, k } => {
            println!("{}", instance.theory()?.per_vertex_msd(k)?);
        }
        TheoryCmd::CheckStability { instance } => {
            let model = instance.theory()?;
            let gram_max = model.gram_matrix().clone().symmetric_eigen().eigenvalues.max();
            let result = serde_json::json!({
                "spectral_radius": model.spectral_radius(),
                "stable": model.is_stable(),
                "max_stable_step": 2.0 / gram_max,
            });
            println!("{result}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn lms_cmd(cmd: LmsCmd) -> Result<ExitCode> {
    let LmsCmd::Run {
        instance,
        iters,
        noise_seed,
        signal_seed,
        init_seed,
        worst_amplitude,
        out,
    } = cmd;
    let inst = instance.resolve()?;
    let truth = bandlimited_test_signal(
        &inst.spectrum,
        &inst.freq,
        CoeffRule::Seeded { seed: signal_seed },
    )?;
    let band = BandLimiter::new(&inst.spectrum, inst.freq.clone())?;
    let model = ObservationModel::new(band, inst.sampling, truth, inst.noise_var, noise_seed)?;
    let init = match (init_seed, worst_amplitude) {
        (Some(seed), None) => InitialEstimate::Seeded { seed },
        (None, Some(amplitude)) => InitialEstimate::WorstMode { amplitude },
        _ => InitialEstimate::Zero,
    };
    let run = lms::run(&model, inst.mu, iters, &init)?;
    let mut csv = String::from("iteration,squared_deviation\n");
    for (k, d) in run.squared_deviation.iter().enumerate() {
        csv.push_str(&format!("{k},{d}\n"));
    }
    emit(out.as_ref(), &csv)?;
    if let Some(at) = run.diverged_at {
        eprintln!("run diverged at iteration {at}");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn adaptive_cmd(cmd: AdaptiveCmd) -> Result<ExitCode> {
    let AdaptiveCmd::Run {
        source,
        rule,
        lambda,
        step,
        noise_var,
        strategy,
        random_seed,
        segments,
        noise_seed,
        init_seed,
        out,
    } = cmd;
    let graph = source.build()?;
    let n = graph.n_nodes();
    let spectrum = Spectrum::decompose(&graph)?;
    let segments = parse_segments(&segments, n)?;
    let noise = DVector::from_element(n, noise_var);
    let trial = experiments::run_adaptive_trial(
        &spectrum,
        &segments,
        threshold_rule(rule),
        &sampler_kind(strategy, random_seed),
        step,
        lambda,
        &noise,
        noise_seed,
        init_seed,
    )?;
    let mut csv = String::from("iteration,nmsd,support_cardinality,sampling_set\n");
    for k in 0..trial.nmsd.len() {
        let set = trial.sampling_sets[k]
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(";");
        csv.push_str(&format!(
            "{k},{},{},{set}\n",
            trial.nmsd[k], trial.support_len[k]
        ));
    }
    emit(out.as_ref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn experiment_cmd(args: ExperimentArgs) -> Result<ExitCode> {
    if args.list_experiments {
        for id in ExperimentId::all() {
            println!("{:<24} {}", id.name(), id.summary());
        }
        return Ok(ExitCode::SUCCESS);
    }
    let Some(ExperimentCmd::Run {
        config,
        experiment,
        master_seed,
        trials,
        iters,
        out,
    }) = args.cmd
    else {
        return Err(Error::InvalidConfig(
            "expected a subcommand or --list-experiments".into(),
        ));
    };
    let mut cfg = match (&config, &experiment) {
        (Some(path), _) => ExperimentConfig::load_json(path)?,
        (None, Some(id)) => ExperimentConfig::builtin(ExperimentId::from_str(id)?),
        (None, None) => {
            return Err(Error::InvalidConfig(
                "provide --config or --experiment".into(),
            ))
        }
    };
    if let (Some(path), Some(id)) = (&config, &experiment) {
        let _ = path;
        cfg.experiment = ExperimentId::from_str(id)?;
    }
    if let Some(seed) = master_seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = trials {
        cfg.n_trials = n;
    }
    if let Some(n) = iters {
        cfg.n_iters = n;
    }
    let out_dir = out.unwrap_or_else(|| PathBuf::from("results").join(cfg.experiment.name()));
    let written = experiments::run_experiment(&cfg, out_dir)?;
    for file in &written.files {
        println!("{}", file.display());
    }
    Ok(ExitCode::SUCCESS)
}

/// 2 for configuration problems, 3 for numerical failures.
fn error_exit_code(err: &Error) -> u8 {
    match err {
        Error::Unstable { .. }
        | Error::EigenSolverFailure
        | Error::EmptyBandEnergy
        | Error::ZeroReference => 3,
        _ => 2,
    }
}

/// Restores the default `SIGPIPE` disposition so that piping output into a
/// pager or `head` terminates the process quietly instead of panicking on a
/// closed pipe.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Graph { cmd } => graph_cmd(cmd),
        Cmd::Sample(args) => sample_cmd(args),
        Cmd::Theory { cmd } => theory_cmd(cmd),
        Cmd::Lms { cmd } => lms_cmd(cmd),
        Cmd::Adaptive { cmd } => adaptive_cmd(cmd),
        Cmd::Experiment(args) => experiment_cmd(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(error_exit_code(&err))
        }
    }
}
