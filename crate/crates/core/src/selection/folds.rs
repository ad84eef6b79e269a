//! Seeded fold construction: uniform shuffle, then contiguous chunks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seeding;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub seed: u64,
    pub k: usize,
    folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    /// (train indices, test indices) for one fold.
    pub fn split(&self, fold: usize) -> (Vec<usize>, &[usize]) {
        let train = self
            .folds
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        (train, &self.folds[fold])
    }
}

/// Partitions `0..n` into `k` folds whose sizes differ by at most one,
/// after a seeded Fisher–Yates shuffle.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k == 0 || k > n {
        return Err(Error::KExceedsN { k, n });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = seeding::rng(seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(indices[start..start + size].to_vec());
        start += size;
    }
    Ok(FoldPlan { seed, k, folds })
}
