use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{self, TreeModel, TreeParams, bootstrap_indices};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// Features tried per split when the caller does not choose: `max(1, p / 3)`.
pub fn default_mtry(p: usize) -> usize {
    (p / 3).max(1)
}

/// Bootstrap-aggregated regression trees.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<TreeModel>,
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Random forest with default tree parameters.
pub fn train_random_forest(data: &Dataset, n_trees: usize, seed_value: u64) -> Result<ForestModel> {
    let params = TreeParams {
        mtry: default_mtry(data.n_features()),
        min_leaf: super::DEFAULT_MIN_LEAF,
    };
    train_forest_with(data, n_trees, params, seed_value)
}

pub fn train_forest_with(data: &Dataset, n_trees: usize, params: TreeParams, seed_value: u64) -> Result<ForestModel> {
    if n_trees < 1 {
        return Err(Error::param("random forest needs at least one tree"));
    }
    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let tree_seed = seed::derive(seed_value, "tree", t as u64);
            let mut rng = seed::rng(seed::derive(tree_seed, "bootstrap", 0));
            let idx = bootstrap_indices(data.n_samples(), &mut rng);
            tree::grow(data, &idx, params, seed::derive(tree_seed, "split", 0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel { trees })
}
