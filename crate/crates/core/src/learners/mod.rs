//! Base learners.
//!
//! A [`LearnerSpec`] describes an untrained learner; training it on a
//! [`Dataset`] with a seed yields a [`Model`]. Training is a pure function of
//! `(spec, data, seed)`, which is what lets the ensemble code cache and
//! parallelise freely.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::ensembles::{self, BaggedModel, BaggingSpec, ModelCache, StackedModel, StackingSpec};
use crate::error::{Error, Result};
use crate::seed::Fingerprint;

pub mod forest;
pub mod knn;
pub mod mean;
pub mod mlp;
mod names;
pub mod pls;
pub mod tree;

pub use forest::{train_random_forest, ForestModel};
pub use knn::{train_knn, KnnModel, Metric};
pub use mean::{train_mean, ConstantModel};
pub use mlp::{train_mlp_rprop, NetModel, NetSpec};
pub use pls::{train_pls, PlsModel};
pub use tree::{train_regression_tree, TreeModel, TreeParams};

/// Minimum leaf size used by forest trees unless overridden.
pub const DEFAULT_MIN_LEAF: usize = 5;

fn default_min_leaf() -> usize {
    DEFAULT_MIN_LEAF
}

/// An untrained learner with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LearnerSpec {
    Mean,
    Knn {
        k: usize,
        alpha: f64,
        metric: Metric,
    },
    Pls {
        components: usize,
    },
    RandomForest {
        trees: usize,
        /// Features tried per split; `None` means `max(1, p / 3)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mtry: Option<usize>,
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
    },
    NeuralNet(NetSpec),
    Bagged(BaggingSpec),
    Stacking(StackingSpec),
}

impl LearnerSpec {
    pub fn knn(k: usize, alpha: f64, metric: Metric) -> Self {
        LearnerSpec::Knn { k, alpha, metric }
    }

    pub fn pls(components: usize) -> Self {
        LearnerSpec::Pls { components }
    }

    pub fn forest(trees: usize) -> Self {
        LearnerSpec::RandomForest {
            trees,
            mtry: None,
            min_leaf: DEFAULT_MIN_LEAF,
        }
    }

    pub fn net(hidden: usize, max_iter: usize, epsilon: f64) -> Self {
        LearnerSpec::NeuralNet(NetSpec {
            hidden,
            max_iter,
            epsilon,
        })
    }

    pub fn bagged(bags: usize, base: LearnerSpec) -> Self {
        LearnerSpec::Bagged(BaggingSpec::new(base, bags))
    }

    /// Short, unique, human-readable name, e.g. `knn-k50-a20-manhattan`.
    pub fn display_name(&self) -> String {
        match self {
            LearnerSpec::Mean => "mean".into(),
            LearnerSpec::Knn { k, alpha, metric } => format!("knn-k{k}-a{alpha}-{metric}"),
            LearnerSpec::Pls { components } => format!("pls-l{components}"),
            LearnerSpec::RandomForest { trees, mtry, min_leaf } => {
                let mut s = format!("rf-n{trees}");
                if let Some(m) = mtry {
                    s.push_str(&format!("-m{m}"));
                }
                if *min_leaf != DEFAULT_MIN_LEAF {
                    s.push_str(&format!("-leaf{min_leaf}"));
                }
                s
            }
            LearnerSpec::NeuralNet(n) => n.display_name(),
            LearnerSpec::Bagged(b) => format!("bag{}-{}", b.bags, b.base.display_name()),
            LearnerSpec::Stacking(s) => {
                let members: Vec<String> = s.ensemble.iter().map(LearnerSpec::display_name).collect();
                format!("stack-f{}[{}]->{}", s.folds, members.join("+"), s.level2.display_name())
            }
        }
    }

    /// Hyperparameter sanity checks that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerSpec::Mean => Ok(()),
            LearnerSpec::Knn { k, alpha, .. } => {
                if *k < 1 {
                    return Err(Error::param("k-NN needs k >= 1"));
                }
                if !(*alpha >= 0.0 && alpha.is_finite()) {
                    return Err(Error::param(format!("k-NN alpha must be finite and >= 0, got {alpha}")));
                }
                Ok(())
            }
            LearnerSpec::Pls { components } => {
                if *components < 1 {
                    return Err(Error::param("PLS needs at least one latent component"));
                }
                Ok(())
            }
            LearnerSpec::RandomForest { trees, mtry, min_leaf } => {
                if *trees < 1 {
                    return Err(Error::param("random forest needs at least one tree"));
                }
                if *min_leaf < 1 || *mtry == Some(0) {
                    return Err(Error::param("random forest needs mtry >= 1 and min_leaf >= 1"));
                }
                Ok(())
            }
            LearnerSpec::NeuralNet(n) => n.validate(),
            LearnerSpec::Bagged(b) => b.validate(),
            LearnerSpec::Stacking(s) => s.validate(),
        }
    }

    /// Stable content hash of the spec.
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_string(self).expect("learner specs always serialise");
        Fingerprint::new().str(&json).finish()
    }

    pub fn train(&self, data: &Dataset, seed: u64) -> Result<Model> {
        self.train_with(data, seed, None)
    }

    /// Trains with an optional model cache shared by nested ensembles.
    ///
    /// Hyperparameters that exceed what the data can support are reduced to
    /// the largest admissible value: k-NN uses `min(k, n)` neighbours and PLS
    /// uses `min(l, p, n - 1)` components. The strict `train_*` functions
    /// still reject such inputs.
    pub fn train_with(&self, data: &Dataset, seed: u64, cache: Option<&ModelCache>) -> Result<Model> {
        self.validate()?;
        Ok(match self {
            LearnerSpec::Mean => Model::Constant(train_mean(data)?),
            LearnerSpec::Knn { k, alpha, metric } => {
                Model::Knn(train_knn(data, (*k).min(data.n_samples()), *alpha, *metric)?)
            }
            LearnerSpec::Pls { components } => {
                let usable = (*components).min(data.n_features()).min(data.n_samples() - 1);
                Model::Pls(pls::fit_pls(data, usable))
            }
            LearnerSpec::RandomForest { trees, mtry, min_leaf } => {
                let p = data.n_features();
                let params = TreeParams {
                    mtry: mtry.unwrap_or_else(|| forest::default_mtry(p)).min(p),
                    min_leaf: *min_leaf,
                };
                Model::Forest(forest::train_forest_with(data, *trees, params, seed)?)
            }
            LearnerSpec::NeuralNet(n) => mlp::train_net(data, n, seed)?,
            LearnerSpec::Bagged(b) => Model::Bagged(ensembles::train_bagging_with(b, data, seed, cache)?),
            LearnerSpec::Stacking(s) => Model::Stacked(ensembles::train_stacking_with(s, data, seed, cache)?),
        })
    }
}

impl fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

/// A trained regression function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Model {
    Constant(ConstantModel),
    Knn(KnnModel),
    Pls(PlsModel),
    Tree(TreeModel),
    Forest(ForestModel),
    Net(NetModel),
    Bagged(BaggedModel),
    Stacked(StackedModel),
}

impl Model {
    /// Predicts one sample. The caller guarantees `x.len() == n_features()`;
    /// use [`Model::try_predict`] for untrusted input.
    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n_features());
        match self {
            Model::Constant(m) => m.predict(x),
            Model::Knn(m) => m.predict(x),
            Model::Pls(m) => m.predict(x),
            Model::Tree(m) => m.predict(x),
            Model::Forest(m) => m.predict(x),
            Model::Net(m) => m.predict(x),
            Model::Bagged(m) => m.predict(x),
            Model::Stacked(m) => m.predict(x),
        }
    }

    pub fn try_predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                actual: x.len(),
            });
        }
        Ok(self.predict(x))
    }

    /// Predictions for every row of `data`, in row order.
    pub fn predict_dataset(&self, data: &Dataset) -> Vec<f64> {
        data.rows().map(|x| self.predict(x)).collect()
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Constant(m) => m.n_features(),
            Model::Knn(m) => m.n_features(),
            Model::Pls(m) => m.n_features(),
            Model::Tree(m) => m.n_features(),
            Model::Forest(m) => m.n_features(),
            Model::Net(m) => m.n_features(),
            Model::Bagged(m) => m.n_features(),
            Model::Stacked(m) => m.n_features(),
        }
    }
}

impl From<StackedModel> for Model {
    fn from(m: StackedModel) -> Self {
        Model::Stacked(m)
    }
}
