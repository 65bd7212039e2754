//! Data-parallel map with a sequential fallback.
//!
//! Every parallel loop in the crate goes through [`map_range`] so that the
//! `parallel` feature (rayon) and the sequential path produce results in the
//! same index order. Reductions are done by the caller on the collected
//! vector, which keeps sums bit-identical across thread counts.

use std::sync::atomic::{AtomicU8, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exec {
    Parallel,
    Sequential,
}

static DEFAULT_EXEC: AtomicU8 = AtomicU8::new(0);

/// Process-wide execution mode. Without the `parallel` feature this is
/// always [`Exec::Sequential`].
pub fn default_exec() -> Exec {
    if cfg!(feature = "parallel") && DEFAULT_EXEC.load(Ordering::Relaxed) == 0 {
        Exec::Parallel
    } else {
        Exec::Sequential
    }
}

pub fn set_default_exec(exec: Exec) {
    DEFAULT_EXEC.store(if exec == Exec::Parallel { 0 } else { 1 }, Ordering::Relaxed);
}

/// Sets the rayon global pool size. Has no effect without the `parallel`
/// feature or once the pool has been built.
pub fn init_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

/// `(start..end).map(f).collect()`, in parallel when `exec` allows.
pub fn map_range<R, F>(exec: Exec, start: usize, end: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (start..end).into_par_iter().map(f).collect(),
        _ => (start..end).map(f).collect(),
    }
}

/// `items.iter().map(f).collect()`, in parallel when `exec` allows.
pub fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Collects a vector of results, stopping at the first error in index order.
pub fn try_map_range<R, E, F>(exec: Exec, start: usize, end: usize, f: F) -> Result<Vec<R>, E>
where
    R: Send,
    E: Send,
    F: Fn(usize) -> Result<R, E> + Sync + Send,
{
    map_range(exec, start, end, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = map_range(Exec::Parallel, 0, 10_000, f);
        let b = map_range(Exec::Sequential, 0, 10_000, f);
        assert_eq!(a, b);
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        assert_eq!(sa.to_bits(), sb.to_bits());
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<usize>, usize> =
            try_map_range(Exec::Parallel, 0, 100, |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(29));
    }
}
