//! Order-preserving map over independent jobs.
//!
//! With the `parallel` feature and `threads > 1` the jobs run on a dedicated
//! rayon pool of that size; otherwise they run in a plain loop. Output order
//! always matches input order, so callers get identical results either way as
//! long as each job is self-contained.

/// How many worker threads a sweep may use. `0` means "all available".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parallelism(pub usize);

impl Parallelism {
    pub const SERIAL: Parallelism = Parallelism(1);

    pub fn all() -> Self {
        Parallelism(0)
    }

    pub fn is_serial(self) -> bool {
        self.0 == 1 || !cfg!(feature = "parallel")
    }
}

impl Default for Parallelism {
    fn default() -> Self {
        Parallelism::all()
    }
}

pub fn map<T, R, F>(items: Vec<T>, parallelism: Parallelism, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Send + Sync,
{
    if parallelism.is_serial() || items.len() < 2 {
        return items.into_iter().map(f).collect();
    }
    parallel_map(items, parallelism, f)
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(items: Vec<T>, parallelism: Parallelism, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Send + Sync,
{
    use rayon::prelude::*;

    let run = || items.into_par_iter().map(&f).collect::<Vec<R>>();
    if parallelism.0 == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.0)
        .build()
    {
        Ok(pool) => pool.install(run),
        // fall back to the global pool
        Err(_) => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(items: Vec<T>, _parallelism: Parallelism, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Send + Sync,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_and_parallel_agree() {
        let items: Vec<u64> = (0..100).collect();
        let a = map(items.clone(), Parallelism::SERIAL, |x| x * x + 1);
        let b = map(items, Parallelism(4), |x| x * x + 1);
        assert_eq!(a, b);
        assert_eq!(a[10], 101);
    }
}
