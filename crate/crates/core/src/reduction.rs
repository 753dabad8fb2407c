//! Deterministic summation.
//!
//! Every reduction over basis amplitudes goes through [`block_sum`]: the input
//! is cut into fixed blocks of [`BLOCK_SIZE`] elements, each block is summed
//! with [`block_partial_by`], and the block partials are summed pairwise. The
//! association
//! order depends only on the input length, so results are bit-identical for
//! any number of worker threads.

use num_traits::Zero;
use rayon::prelude::*;
use std::ops::Add;

/// Number of elements per reduction block.
pub const BLOCK_SIZE: usize = 4096;

/// Elements summed sequentially before pairwise combination.
pub const LEAF: usize = 16;

/// Leaves per full block.
pub const LEAVES_PER_BLOCK: usize = BLOCK_SIZE / LEAF;

/// Pairwise sum of `xs`, mapping each element through `f` first.
pub fn pairwise_sum_by<S, T, F>(xs: &[S], f: &F) -> T
where
    T: Copy + Zero + Add<Output = T>,
    F: Fn(&S) -> T,
{
    if xs.len() <= LEAF {
        let mut acc = T::zero();
        for x in xs {
            acc = acc + f(x);
        }
        acc
    } else {
        let mid = xs.len() / 2;
        pairwise_sum_by(&xs[..mid], f) + pairwise_sum_by(&xs[mid..], f)
    }
}

pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + Zero + Add<Output = T>,
{
    pairwise_sum_by(xs, &|x: &T| *x)
}

/// Sum of one block (at most [`BLOCK_SIZE`] elements): consecutive runs of
/// [`LEAF`] elements are summed sequentially and the run totals pairwise.
pub fn block_partial_by<S, T, F>(block: &[S], f: &F) -> T
where
    T: Copy + Zero + Add<Output = T>,
    F: Fn(&S) -> T,
{
    debug_assert!(block.len() <= BLOCK_SIZE);
    let mut leaves = [T::zero(); LEAVES_PER_BLOCK];
    let mut used = 0;
    for (slot, leaf) in leaves.iter_mut().zip(block.chunks(LEAF)) {
        let mut acc = T::zero();
        for x in leaf {
            acc = acc + f(x);
        }
        *slot = acc;
        used += 1;
    }
    pairwise_sum(&leaves[..used])
}

/// Fixed-block pairwise sum of `f(x)` over `xs`; blocks run in parallel.
pub fn block_sum_by<S, T, F>(xs: &[S], f: F) -> T
where
    S: Sync,
    T: Copy + Zero + Add<Output = T> + Send,
    F: Fn(&S) -> T + Sync,
{
    let partials: Vec<T> = xs
        .par_chunks(BLOCK_SIZE)
        .map(|block| block_partial_by(block, &f))
        .collect();
    pairwise_sum(&partials)
}

pub fn block_sum<T>(xs: &[T]) -> T
where
    T: Copy + Zero + Add<Output = T> + Send + Sync,
{
    block_sum_by(xs, |x: &T| *x)
}
