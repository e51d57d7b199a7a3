//! Evolutionary search over stacking ensembles.
//!
//! A genome ([`Individual`]) picks a level-2 learner and a fold count, plus
//! a membership bit per entry of a learner [`Registry`]. Fitness is the
//! inverse RMSE of the stacking ensemble the genome decodes to.

mod ga;
mod genome;
mod registry;

pub use ga::{
    fitness_from_rmse, ga_run, ga_run_with, roulette_indices, roulette_select, EvolutionTrace, FitnessEvaluator, FitnessMode, GaConfig,
    IterationRecord, MAX_FITNESS, RMSE_FLOOR,
};
pub use genome::{
    crossover, enforce_size_limit, mutate_folds, mutate_level2, mutate_m, mutate_v, random_individual, Individual,
};
pub use registry::{build_default_registry, Registry};
