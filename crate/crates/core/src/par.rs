//! Indexed map helpers that run on rayon when the `parallel` feature is
//! enabled and fall back to a plain loop otherwise. Output order always
//! matches index order, so results are identical either way.

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Always-sequential twin of [`map_indexed`], kept for benchmarking and for
/// callers that need to stay on one thread.
pub(crate) fn map_indexed_serial<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_serial_agree() {
        let a = map_indexed(100, |i| i * i);
        let b = map_indexed_serial(100, |i| i * i);
        assert_eq!(a, b);
    }
}
