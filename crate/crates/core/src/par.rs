//! Execution policy for the data-parallel inner loops.
//!
//! Every parallel loop in this crate writes to disjoint output elements and
//! performs no floating-point reductions, so the parallel and sequential paths
//! produce bitwise-identical results for any thread count.

use serde::{Deserialize, Serialize};

/// Work size (elements touched per sweep) above which [`Execution::Auto`]
/// switches to the parallel path.
pub const AUTO_PARALLEL_THRESHOLD: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    Parallel,
    /// Parallel when the per-sweep work exceeds [`AUTO_PARALLEL_THRESHOLD`].
    #[default]
    Auto,
}

impl Execution {
    /// Whether a sweep touching `work` elements should run in parallel.
    ///
    /// Always `false` when the crate is built without the `parallel` feature.
    pub fn use_parallel(self, work: usize) -> bool {
        if !cfg!(feature = "parallel") {
            return false;
        }
        match self {
            Execution::Sequential => false,
            Execution::Parallel => true,
            Execution::Auto => work >= AUTO_PARALLEL_THRESHOLD,
        }
    }
}

impl std::str::FromStr for Execution {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "sequential" => Ok(Execution::Sequential),
            "parallel" => Ok(Execution::Parallel),
            "auto" => Ok(Execution::Auto),
            other => Err(crate::error::Error::InvalidConfig(format!(
                "unknown execution mode '{other}' (expected sequential, parallel or auto)"
            ))),
        }
    }
}

/// Caps the global worker pool at `threads`. Must run before any parallel work;
/// a no-op without the `parallel` feature.
pub fn limit_threads(threads: usize) -> crate::error::Result<()> {
    if threads == 0 {
        return Err(crate::error::Error::InvalidConfig(
            "thread count must be >= 1".into(),
        ));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| crate::error::Error::InvalidConfig(e.to_string()))?;
    Ok(())
}

/// Runs an `ndarray::Zip` with `for_each` or `par_for_each` depending on `$par`.
macro_rules! zip_for_each {
    ($par:expr, $zip:expr, $body:expr) => {{
        #[cfg(feature = "parallel")]
        {
            if $par {
                $zip.par_for_each($body)
            } else {
                $zip.for_each($body)
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = $par;
            $zip.for_each($body)
        }
    }};
}

pub(crate) use zip_for_each;

/// Maps `f` over `items`, in parallel when the `parallel` feature is enabled
/// and `parallel` is set. Output order always matches input order.
pub fn map_ordered<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.iter().map(f).collect()
}
