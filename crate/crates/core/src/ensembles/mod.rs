//! Bagging and stacked generalisation over arbitrary learner specs.

mod bagging;
mod cache;
mod stacking;

pub use bagging::{train_bagging, train_bagging_with, BaggedModel, BaggingSpec};
pub use cache::ModelCache;
pub use stacking::{
    compose, level2_training_set, train_stacking, train_stacking_with, Level2Set, StackedModel, StackingSpec,
    MAX_FOLDS, MIN_FOLDS,
};
