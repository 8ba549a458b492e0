//! Data-parallel map with a sequential fallback.
//!
//! Eigenvalue scans, grid samplings and batch evaluations funnel through
//! [`map`]; with the `parallel` feature (default) they fan out over rayon,
//! without it they run sequentially. Results are order-preserving either way,
//! so outputs are identical across both modes.

#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Sequential map, kept available in all configurations so benchmarks can
/// compare both paths within one build.
pub fn map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn parallel_and_sequential_agree() {
        let xs: Vec<f64> = (0..257).map(|i| i as f64 * 0.25).collect();
        let f = |x: f64| (x * 1.7).sin() * x;
        assert_eq!(super::map(xs.clone(), f), super::map_seq(xs, f));
    }
}
