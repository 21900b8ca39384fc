//! Least-mean-squares estimation of band-limited signals on undirected graphs.
//!
//! The crate is organised around a small pipeline:
//!
//! * [`graph`] builds weighted undirected graphs and their Laplacians;
//! * [`spectrum`] diagonalises the Laplacian and provides the graph Fourier
//!   transform;
//! * [`sets`] and [`operators`] define frequency / vertex index sets and the
//!   projection operators attached to them;
//! * [`lms`] runs the online estimator from streaming noisy samples;
//! * [`msd`] evaluates the closed-form steady-state deviation of that
//!   estimator;
//! * [`sampling`] chooses which vertices to observe;
//! * [`adaptive`] extends the estimator with sparsity thresholds so the
//!   frequency support itself is learned online;
//! * [`scenario`] and [`experiments`] generate synthetic test beds and run
//!   the bundled reproducible experiments.
//!
//! Monte Carlo fan-out and greedy candidate scans run on rayon when the
//! default `parallel` feature is enabled; every parallel entry point has a
//! sequential twin so results can be compared and the crate stays usable
//! without threads.

pub mod adaptive;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod lms;
pub mod msd;
pub mod operators;
pub mod sampling;
pub mod scenario;
pub mod sets;
pub mod spectrum;

mod linalg;
mod noise;
mod par;

pub use error::{Error, Result};

// The public API takes and returns nalgebra vectors/matrices; re-export the
// crate so downstreams build them without pinning a matching version.
pub use nalgebra;
