//! Deterministic fan-out over independent work items.
//!
//! Replicated simulations and parameter sweeps are embarrassingly parallel,
//! but the output must not depend on how the work was scheduled. Both
//! helpers here collect results in index order, and [`derive_seed`] gives
//! each item a seed that depends only on the root seed and the item index,
//! so a run produces byte-identical output whether it used one thread or
//! sixty-four — or the `parallel` feature at all.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every index in `0..n`, collecting results in index order.
///
/// With the `parallel` feature enabled the items run on the rayon thread
/// pool; otherwise this is a plain sequential map. `f` must be a pure
/// function of its index (plus captured immutable state) for the two modes
/// to agree.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Sequential twin of [`map_indexed`], used when the crate is built without
/// the `parallel` feature.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Always-sequential map with the same signature as [`map_indexed`].
///
/// Exists so benchmarks can compare the two execution modes within a single
/// build instead of juggling feature flags.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Derives a per-item seed from a root seed and an item index.
///
/// Uses the splitmix64 finalizer, which maps distinct inputs to distinct
/// outputs (it is a bijection on `u64`), so items never share a seed and
/// nearby indices get statistically unrelated streams.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
