//! Computational algebra for matrices over division rings: certified
//! commutator factorizations, similarity canonical forms, quaternion
//! constructions, and exhaustive polynomial-image exploration on small
//! finite matrix rings.
//!
//! Every decomposition produces a certificate that is re-verified by direct
//! multiplication; exact domains replay exactly, the float quaternion domain
//! replays within its recorded tolerance.

pub mod canonical;
pub mod cert;
pub mod error;
pub mod factor;
pub mod freealg;
pub mod imagelab;
pub mod matrix;
pub mod scalar;

pub use error::{AlgebraError, Result};
pub use matrix::Matrix;
pub use scalar::{Scalar, ScalarDomain};

/// Maps an indexed computation over a range, in parallel when the `parallel`
/// feature is enabled, and merges the per-item results with `merge`.
pub fn par_map_reduce<T, F, M>(n: usize, map: F, identity: T, merge: M) -> T
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(map)
            .reduce_with(&merge)
            .unwrap_or(identity)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(map).fold(identity, merge)
    }
}

/// Sequential twin of [`par_map_reduce`], kept callable regardless of the
/// feature set so benchmarks can compare the two paths directly.
pub fn seq_map_reduce<T, F, M>(n: usize, map: F, identity: T, merge: M) -> T
where
    F: Fn(usize) -> T,
    M: Fn(T, T) -> T,
{
    (0..n).map(map).fold(identity, merge)
}

/// Chunked variant for cheap per-item work: the index range is cut into
/// contiguous chunks so each task builds one accumulator instead of one per
/// item.
pub fn par_chunk_reduce<T, F, M>(n: usize, chunk: usize, map: F, identity: T, merge: M) -> T
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    M: Fn(T, T) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    par_map_reduce(
        chunks,
        |c| map(c * chunk..((c + 1) * chunk).min(n)),
        identity,
        merge,
    )
}

/// Sequential twin of [`par_chunk_reduce`].
pub fn seq_chunk_reduce<T, F, M>(n: usize, chunk: usize, map: F, identity: T, merge: M) -> T
where
    F: Fn(std::ops::Range<usize>) -> T,
    M: Fn(T, T) -> T,
{
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    (0..chunks)
        .map(|c| map(c * chunk..((c + 1) * chunk).min(n)))
        .fold(identity, merge)
}
