//! Cross-checks of the numerical core against independent reference
//! implementations: the Laplacian eigendecomposition against a cyclic Jacobi
//! solver, and the reduced-coordinate estimator against the same recursion
//! written with full vertex-space projector matrices.

mod common;

use common::{full_form_step, jacobi_eigen};
use graphlms::experiments::{benchmark_graph, NoiseSpec};
use graphlms::lms::{lms_step, InitialEstimate, LmsState, ObservationModel};
use graphlms::nalgebra::DVector;
use graphlms::operators::BandLimiter;
use graphlms::sampling::{self, SamplerKind};
use graphlms::scenario::{bandlimited_test_signal, CoeffRule};
use graphlms::sets::FrequencySet;
use graphlms::spectrum::Spectrum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn laplacian_spectrum_matches_jacobi_oracle() {
    for (seed, n) in [(1u64, 8usize), (2, 10), (3, 13), (5, 17)] {
        let graph = benchmark_graph(seed, n).unwrap();
        let spectrum = Spectrum::decompose(&graph).unwrap();
        let lap = graph.laplacian();

        let (oracle_vals, _) = jacobi_eigen(&lap);
        let scale = 1.0 + oracle_vals[n - 1].abs();
        for i in 0..n {
            let gap = (spectrum.eigenvalue(i) - oracle_vals[i]).abs();
            assert!(
                gap <= 1e-9 * scale,
                "eigenvalue {i} of the {n}-node graph differs from the Jacobi \
                 oracle: {} vs {}",
                spectrum.eigenvalue(i),
                oracle_vals[i]
            );
        }

        // The library's own eigenpairs must satisfy the defining equation and
        // form an orthonormal basis.
        for i in 0..n {
            let col = spectrum.basis_column(i);
            let r = (&lap * &col - spectrum.eigenvalue(i) * &col).norm();
            assert!(r <= 1e-9 * scale, "eigenpair {i} residual {r}");
        }
        let u = spectrum.basis();
        let gram = u.transpose() * u;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[(i, j)] - want).abs() <= 1e-10,
                    "basis not orthonormal at ({i}, {j})"
                );
            }
        }

        // A connected graph has a single zero eigenvalue with a constant
        // eigenvector.
        assert!(spectrum.eigenvalue(0).abs() <= 1e-9 * scale);
        assert!(spectrum.eigenvalue(1) > 1e-8, "graph should be connected");
        let first = spectrum.basis_column(0);
        let level = 1.0 / (n as f64).sqrt();
        assert!(
            first.iter().all(|&v| (v.abs() - level).abs() <= 1e-9),
            "zero-frequency eigenvector should be constant"
        );
    }
}

#[test]
fn reduced_recursion_matches_full_form_oracle() {
    let n = 30;
    let graph = benchmark_graph(4, n).unwrap();
    let spectrum = Spectrum::decompose(&graph).unwrap();
    let freq = FrequencySet::lowest(6, n).unwrap();
    let noise_var = NoiseSpec::UniformRange { max: 0.01, seed: 9 }.build(n).unwrap();
    let set =
        sampling::select(&SamplerKind::MaxDet, &spectrum, &freq, &noise_var, 0.5, 10).unwrap();
    let truth = bandlimited_test_signal(&spectrum, &freq, CoeffRule::Seeded { seed: 11 }).unwrap();
    let band = BandLimiter::new(&spectrum, freq.clone()).unwrap();
    let projector = band.matrix();
    let mask = set.mask(n);
    let model = ObservationModel::new(band.clone(), set, truth, noise_var, 21).unwrap();

    // Both recursions start from the same explicit band coefficients.
    let mu = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let s0 = DVector::from_fn(freq.len(), |_, _| rng.random_range(-1.0..1.0));
    let x0 = band.from_spectral(&s0).into_vector();
    let same_start = InitialEstimate::Given(s0.clone());
    let one = graphlms::lms::run(&model, mu, 1, &same_start).unwrap();
    assert_eq!(one.squared_deviation.len(), 2);

    let mut state = LmsState::new(s0, mu);
    let mut x_full = x0;
    for k in 0..200u64 {
        let y = model.observe(k);
        let y_vec = y.as_vector().clone_owned();
        state = lms_step(&state, &model, &y).unwrap();
        x_full = full_form_step(&x_full, &projector, &mask, &y_vec, mu);
        let x_reduced = band.from_spectral(state.estimate_spectral()).into_vector();
        let gap = (&x_full - &x_reduced).amax();
        assert!(
            gap <= 1e-9,
            "full-form and reduced recursions drift apart at step {k}: {gap}"
        );
    }
    // After 200 noisy updates the estimate should hover near the truth.
    let final_err = (&x_full - model.truth().as_vector()).norm_squared();
    assert!(
        final_err < 1.0,
        "oracle recursion failed to approach the truth: {final_err}"
    );
}
