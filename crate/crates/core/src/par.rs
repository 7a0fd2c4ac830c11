//! Element loops that run on the rayon pool when requested and available.

pub use hho_sparse::Exec;

/// Maps `f` over 0..n, in parallel for `Exec::Par` when the `parallel`
/// feature is enabled. Output order is always index order.
pub fn par_map<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Par {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Fallible variant of [`par_map`]; the first error in index order is returned.
pub fn try_par_map<T, E, F>(exec: Exec, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    par_map(exec, n, f).into_iter().collect()
}
