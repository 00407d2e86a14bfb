//! Batch execution over independent work items: data-parallel with rayon when
//! the `parallel` feature is enabled, plain iteration otherwise. Outputs are
//! collected in item order, so results are independent of the thread count.

use rand::rngs::StdRng;
use rand::SeedableRng;

/// How a batch of independent items is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

// Not derived: the default depends on the feature set.
#[allow(clippy::derivable_impls)]
impl Default for ExecMode {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            ExecMode::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            ExecMode::Sequential
        }
    }
}

/// Runs `task` for indices `0..count`, returning results in index order.
pub fn run_batch<T, F>(mode: ExecMode, count: usize, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..count).map(task).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(task).collect()
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for stream `stream` of a base seed. Used so
/// that per-item randomness does not depend on execution order.
pub fn stream_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream))
}

/// Seeded generator for stream `stream` of `base`.
pub fn stream_rng(base: u64, stream: u64) -> StdRng {
    StdRng::seed_from_u64(stream_seed(base, stream))
}
