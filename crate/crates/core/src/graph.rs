//! Weighted undirected graphs and vertex-domain signals.

use std::ops::Deref;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected graph on `n` vertices with symmetric nonnegative edge
/// weights and an empty diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    weights: DMatrix<f64>,
}

/// Serialised form: vertex count plus a list of `[i, j, w]` triples.
#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    /// Builds a graph from a full weight matrix.
    ///
    /// The matrix must be square and exactly symmetric with a zero diagonal
    /// and finite nonnegative entries.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if weights.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: weights.ncols(),
            });
        }
        for i in 0..n {
            if weights[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let w = weights[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidGraph(format!("bad weight at ({i},{j}): {w}")));
                }
                if w != weights[(j, i)] {
                    return Err(Error::InvalidGraph(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { weights })
    }

    /// Builds a graph from an edge list. Each `(i, j, w)` sets both `(i, j)`
    /// and `(j, i)`. Self-loops, duplicate pairs (in either order),
    /// out-of-range indices and negative or non-finite weights are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = DMatrix::zeros(n, n);
        let mut seen = vec![false; n * n];
        for &(i, j, w) in edges {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, size: n });
            }
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, size: n });
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!("bad weight at ({i},{j}): {w}")));
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            if seen[a * n + b] {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i},{j})")));
            }
            seen[a * n + b] = true;
            weights[(a, b)] = w;
            weights[(b, a)] = w;
        }
        Ok(Self { weights })
    }

    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            weights: DMatrix::zeros(n, n),
        }
    }

    /// Number of vertices.
    pub fn n_nodes(&self) -> usize {
        self.weights.nrows()
    }

    /// Full symmetric weight matrix.
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Weight of the edge `(i, j)`; zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    /// Positive-weight edges as `(i, j, w)` with `i < j`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Weighted degree of vertex `i` (row sum of the weight matrix).
    pub fn degree(&self, i: usize) -> f64 {
        self.weights.row(i).sum()
    }

    /// Combinatorial Laplacian `L = K - A` where `K` is the diagonal matrix
    /// of weighted degrees and `A` the weight matrix. Symmetric, rows sum to
    /// zero, positive semidefinite.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n_nodes();
        let mut l = -self.weights.clone();
        for i in 0..n {
            l[(i, i)] = self.degree(i);
        }
        l
    }

    /// True when every vertex is reachable from vertex 0 along positive
    /// weights. The empty graph on one vertex is connected; on zero vertices
    /// it is trivially connected as well.
    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1usize;
        while let Some(v) = stack.pop() {
            for (u, reached) in seen.iter_mut().enumerate() {
                if !*reached && self.weights[(v, u)] > 0.0 {
                    *reached = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }

    /// Serialises to the JSON edge-list format.
    pub fn to_json_string(&self) -> String {
        let file = GraphFile {
            n: self.n_nodes(),
            edges: self.edges(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialisation")
    }

    /// Parses the JSON edge-list format, applying the same validation as
    /// [`Graph::from_edges`].
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(s)?;
        Self::from_edges(file.n, &file.edges)
    }

    /// Writes the JSON edge-list format to `path`.
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    /// Reads the JSON edge-list format from `path`.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

/// A real-valued signal indexed by the vertices of a graph.
///
/// Dereferences to [`DVector<f64>`] for read access; construct a new signal
/// to mutate.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSignal(DVector<f64>);

impl GraphSignal {
    /// Wraps a dense vector.
    pub fn new(values: DVector<f64>) -> Self {
        Self(values)
    }

    /// All-zero signal on `n` vertices.
    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    /// Builds a signal from a plain `Vec`.
    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(DVector::from_vec(values))
    }

    /// Number of vertices the signal is defined on.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True when the signal has no entries.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Borrows the underlying vector.
    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    /// Consumes the signal, returning the underlying vector.
    pub fn into_vector(self) -> DVector<f64> {
        self.0
    }
}

impl Deref for GraphSignal {
    type Target = DVector<f64>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl From<DVector<f64>> for GraphSignal {
    fn from(v: DVector<f64>) -> Self {
        Self(v)
    }
}
