//! Data-parallel helper for the sampling and verification suites.
//!
//! With the `parallel` feature (default) work is spread over rayon; without
//! it, or when the caller asks for the sequential path explicitly, the same
//! closure runs in a plain loop. Tasks are indexed so per-task RNGs can be
//! seeded deterministically regardless of scheduling.

/// Run `f(0..n)` and collect the results in index order.
#[cfg(feature = "parallel")]
pub fn run<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn run<T, F>(n: usize, _parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn preserves_order() {
        let out = super::run(100, true, |i| i * i);
        assert_eq!(out[7], 49);
        assert_eq!(out.len(), 100);
        let seq = super::run(100, false, |i| i * i);
        assert_eq!(out, seq);
    }
}
