//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool.
//! Without it, or with [`ExecMode::Sequential`], the same closures run in
//! order on the calling thread. Results are always returned in index order,
//! so callers that reduce them sequentially get bitwise-identical output in
//! either mode.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    #[default]
    Parallel,
    Sequential,
}

/// Whether the crate was compiled with rayon support.
pub fn is_parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `f` over `0..count`, preserving index order in the output.
#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(count: usize, mode: ExecMode, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match mode {
        ExecMode::Parallel => (0..count).into_par_iter().map(f).collect(),
        ExecMode::Sequential => (0..count).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(count: usize, _mode: ExecMode, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}

/// Maps `f` over a slice, preserving order.
#[cfg(feature = "parallel")]
pub fn map_slice<T, U, F>(data: &[T], mode: ExecMode, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match mode {
        ExecMode::Parallel => data.par_iter().map(f).collect(),
        ExecMode::Sequential => data.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, U, F>(data: &[T], _mode: ExecMode, f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    data.iter().map(f).collect()
}
