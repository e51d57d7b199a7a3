use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// `ceil(x)` that ignores representation noise just above an integer
/// (`0.1 * 3120` is `312.00000000000006`).
pub(crate) fn ceil_tolerant(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// `floor(x)` that ignores representation noise just below an integer.
pub(crate) fn floor_tolerant(x: f64) -> usize {
    (x + 1e-9).floor().max(0.0) as usize
}

/// Uniform sample of `ceil(fraction * n)` rows without replacement.
pub fn subsample<R: Rng + ?Sized>(data: &Dataset, fraction: f64, rng: &mut R) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::param(format!("subsample fraction must be in (0, 1], got {fraction}")));
    }
    let n = data.n_samples();
    let m = ceil_tolerant(fraction * n as f64).clamp(1, n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.truncate(m);
    Ok(data.subset(&idx))
}

/// Random partition of `0..n` into `k` folds whose sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    k: usize,
    membership: Vec<usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_samples(&self) -> usize {
        self.membership.len()
    }

    pub fn fold_of(&self, sample: usize) -> usize {
        self.membership[sample]
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    /// Held-out sample indices of `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.membership.len()).filter(|&i| self.membership[i] == fold).collect()
    }

    /// Training sample indices for `fold` (all other folds), ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.membership.len()).filter(|&i| self.membership[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.membership {
            sizes[f] += 1;
        }
        sizes
    }
}

pub fn assign_folds<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::param(format!("fold count must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::param(format!("fold count {k} exceeds sample count {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut membership = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        membership[i] = pos % k;
    }
    Ok(FoldAssignment { k, membership })
}
