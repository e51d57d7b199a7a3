use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ModelCache;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::learners::tree::bootstrap_indices;
use crate::learners::{LearnerSpec, Model};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingSpec {
    pub bags: usize,
    pub base: Box<LearnerSpec>,
}

impl BaggingSpec {
    pub fn new(base: LearnerSpec, bags: usize) -> Self {
        BaggingSpec {
            bags,
            base: Box::new(base),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bags < 1 {
            return Err(Error::param("bagging needs at least one bag"));
        }
        self.base.validate()
    }
}

/// Average of models trained on bootstrap resamples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaggedModel {
    members: Vec<Model>,
}

impl BaggedModel {
    pub fn members(&self) -> &[Model] {
        &self.members
    }

    pub fn n_features(&self) -> usize {
        self.members[0].n_features()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.members.iter().map(|m| m.predict(x)).sum::<f64>() / self.members.len() as f64
    }
}

pub fn train_bagging(spec: &BaggingSpec, data: &Dataset, seed_value: u64) -> Result<BaggedModel> {
    train_bagging_with(spec, data, seed_value, None)
}

/// Bag `b` resamples `n` rows with replacement using the stream
/// `derive(seed, "bag", b)` and trains the base learner with
/// `derive(seed, "bag-train", b)`.
pub fn train_bagging_with(
    spec: &BaggingSpec,
    data: &Dataset,
    seed_value: u64,
    _cache: Option<&ModelCache>,
) -> Result<BaggedModel> {
    spec.validate()?;
    let members = (0..spec.bags)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::rng(seed::derive(seed_value, "bag", b as u64));
            let sample = data.subset(&bootstrap_indices(data.n_samples(), &mut rng));
            spec.base
                .train_with(&sample, seed::derive(seed_value, "bag-train", b as u64), None)
                .map_err(|e| Error::Bag { bag: b, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaggedModel { members })
}
