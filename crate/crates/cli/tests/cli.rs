//! End-to-end tests of the `graphlms` binary: output formats, flag
//! handling, determinism of the experiment harness, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphlms"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be UTF-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

#[test]
fn graph_gen_info_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let gen = run(&["graph", "gen", "--nodes", "20", "--seed", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&gen), 0, "gen failed: {}", stderr(&gen));

    let info = run(&["graph", "info", "--graph", path.to_str().unwrap()]);
    assert_eq!(code(&info), 0, "info failed: {}", stderr(&info));
    let v: serde_json::Value = serde_json::from_str(&stdout(&info)).unwrap();
    assert_eq!(v["n"], 20);
    assert_eq!(v["connected"], true);
    assert!(v["mean_degree"].as_f64().unwrap() > 0.0);
}

#[test]
fn graph_gen_is_deterministic() {
    let a = run(&["graph", "gen", "--nodes", "30", "--seed", "11"]);
    let b = run(&["graph", "gen", "--nodes", "30", "--seed", "11"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(!stdout(&a).is_empty());
}

#[test]
fn sample_reports_set_and_reconstruction_gap() {
    let out = run(&["sample", "--m", "10"]);
    assert_eq!(code(&out), 0, "sample failed: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["strategy"], "max_det");
    assert_eq!(v["m"], 10);
    let indices = v["indices"].as_array().unwrap();
    assert_eq!(indices.len(), 10);
    let gap = v["reconstruction_gap"].as_f64().unwrap();
    assert!(gap < 1.0, "a 10-vertex set for a 10-dim band should allow reconstruction, gap {gap}");
}

#[test]
fn sample_strategies_all_run() {
    for strategy in ["min-msd", "max-det", "max-lambda-min", "random"] {
        let out = run(&["sample", "--strategy", strategy, "--m", "12"]);
        assert_eq!(code(&out), 0, "{strategy} failed: {}", stderr(&out));
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["indices"].as_array().unwrap().len(), 12);
    }
}

#[test]
fn theory_msd_matches_library_value() {
    use graphlms::experiments::{benchmark_graph, BENCHMARK_GRAPH_SEED, BENCHMARK_NODES, NoiseSpec};
    use graphlms::msd::TheoryModel;
    use graphlms::sampling::{self, SamplerKind};
    use graphlms::sets::FrequencySet;
    use graphlms::spectrum::Spectrum;

    let out = run(&["theory", "msd", "--m", "10"]);
    assert_eq!(code(&out), 0, "theory msd failed: {}", stderr(&out));
    let cli_value: f64 = stdout(&out).trim().parse().unwrap();

    let graph = benchmark_graph(BENCHMARK_GRAPH_SEED, BENCHMARK_NODES).unwrap();
    let spectrum = Spectrum::decompose(&graph).unwrap();
    let freq = FrequencySet::lowest(10, BENCHMARK_NODES).unwrap();
    let noise = NoiseSpec::default().build(BENCHMARK_NODES).unwrap();
    let set = sampling::select(&SamplerKind::MaxDet, &spectrum, &freq, &noise, 0.5, 10).unwrap();
    let model = TheoryModel::build(&spectrum, &freq, &set, &noise, 0.5).unwrap();
    let lib_value = model.steady_state_msd().unwrap();

    assert_eq!(cli_value, lib_value, "CLI must print the library value exactly");
}

#[test]
fn theory_accepts_explicit_sampling_set() {
    let out = run(&["theory", "check-stability", "--set", "3,5,8,17,20,22,26,33,39,44"]);
    assert_eq!(code(&out), 0, "check-stability failed: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["stable"], true);
    assert!(v["spectral_radius"].as_f64().unwrap() < 1.0);
    assert!(v["max_stable_step"].as_f64().unwrap() > 0.5);
}

#[test]
fn lms_run_emits_converging_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let out = run(&["lms", "run", "--m", "10", "--iters", "200", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "lms run failed: {}", stderr(&out));

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,squared_deviation"));
    let rows: Vec<(usize, f64)> = lines
        .map(|l| {
            let (k, d) = l.split_once(',').unwrap();
            (k.parse().unwrap(), d.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 201, "one row per update plus the initial state");
    assert_eq!(rows[0].0, 0);
    assert!(rows[200].1 < rows[0].1 / 100.0, "deviation should shrink from {} to {}", rows[0].1, rows[200].1);
    assert!(rows.iter().all(|r| r.1.is_finite()));
}

#[test]
fn lms_run_divergence_exits_3() {
    let out = run(&["lms", "run", "--m", "10", "--iters", "2000", "--step", "50"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("diverged"), "stderr: {}", stderr(&out));
    // The truncated trace is still emitted.
    assert!(stdout(&out).starts_with("iteration,squared_deviation"));
}

#[test]
fn adaptive_run_emits_per_iteration_schedule() {
    let out = run(&["adaptive", "run", "--segments", "5:5,5:15"]);
    assert_eq!(code(&out), 0, "adaptive run failed: {}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,nmsd,support_cardinality,sampling_set"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11, "initial state plus one row per update");
    for row in &rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 4, "bad row {row:?}");
        let _: f64 = cols[1].parse().unwrap();
        let support: usize = cols[2].parse().unwrap();
        assert!(support <= 50);
        for idx in cols[3].split(';') {
            let idx: usize = idx.parse().unwrap();
            assert!(idx < 50);
        }
    }
}

#[test]
fn experiment_list_enumerates_builtins() {
    let out = run(&["experiment", "--list-experiments"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for id in [
        "fig2",
        "fig3",
        "fig4",
        "fig5",
        "adaptive",
        "carto_nmsd_vs_samples",
        "carto_tracking",
    ] {
        assert!(text.lines().any(|l| l.starts_with(id)), "missing {id} in:\n{text}");
    }
    assert_eq!(text.lines().count(), 7);
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn experiment_reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let out = run(&[
            "experiment", "run",
            "--experiment", "fig2",
            "--trials", "2",
            "--out", out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "experiment run failed: {}", stderr(&out));
    }
    let files_a = read_dir_sorted(&a);
    let files_b = read_dir_sorted(&b);
    assert_eq!(files_a.len(), 2, "expected manifest + one table");
    assert_eq!(files_a, files_b, "reruns must produce identical bytes");
}

#[test]
fn experiment_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, r#"{"experiment": "fig2", "n_trials": 5}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "experiment", "run",
        "--config", cfg_path.to_str().unwrap(),
        "--trials", "1",
        "--master-seed", "99",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "experiment run failed: {}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["n_trials"], 1);
    assert_eq!(manifest["config"]["master_seed"], 99);
    assert_eq!(manifest["config"]["experiment"], "fig2");
}

#[test]
fn experiment_run_lists_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(&[
        "experiment", "run",
        "--experiment", "fig2",
        "--trials", "1",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    for line in stdout(&out).lines() {
        assert!(Path::new(line).is_file(), "reported path {line} does not exist");
    }
    assert!(stdout(&out).lines().count() >= 2);
}

#[test]
fn config_errors_exit_2() {
    // Unknown experiment id.
    let out = run(&["experiment", "run", "--experiment", "nope"]);
    assert_eq!(code(&out), 2);
    // Neither config nor experiment.
    let out = run(&["experiment", "run"]);
    assert_eq!(code(&out), 2);
    // Unparseable config file.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = run(&["experiment", "run", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    // Config with an unknown field.
    std::fs::write(&bad, r#"{"experiment": "fig2", "n_trails": 3}"#).unwrap();
    let out = run(&["experiment", "run", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    // Malformed sampling set.
    let out = run(&["theory", "msd", "--set", "1,2,banana"]);
    assert_eq!(code(&out), 2);
    // Sampling index beyond the graph.
    let out = run(&["theory", "msd", "--set", "1,2,400"]);
    assert_eq!(code(&out), 2);
    // Missing graph file.
    let out = run(&["graph", "info", "--graph", "/nonexistent/g.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn numerical_failures_exit_3() {
    // Sampling budget below the bandwidth leaves the recursion unstable.
    let out = run(&["theory", "msd", "--m", "3", "--bandwidth", "10"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("unstable"), "stderr: {}", stderr(&out));
}
