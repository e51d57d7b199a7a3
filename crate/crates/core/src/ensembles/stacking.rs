//! Stacked generalisation for regression.
//!
//! Training splits the data into `folds` folds. For every fold the level-1
//! learners are trained on the remaining folds and asked to predict the
//! held-out samples; each held-out sample becomes one level-2 training row
//! `(L1_0(x), .., L1_n(x); y)`. The level-1 learners are then retrained on
//! all data and the level-2 learner is trained on the collected rows. The
//! resulting model predicts `L2(L1_0(x), .., L1_n(x))`.
//!
//! Seeds: fold assignment uses `derive(seed, "stack-folds", folds)`. A
//! level-1 member trained for fold `j` uses
//! `derive_path(seed, "stack-l1", [j, member])` and the final refit uses
//! `derive_path(seed, "stack-l1-full", [member])`, where `member` identifies
//! the learner by its spec fingerprint (plus an occurrence counter for
//! repeated specs) rather than by its position in the ensemble. The level-2
//! learner uses `derive(seed, "stack-l2", 0)`.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cache::train_maybe_cached;
use super::ModelCache;
use crate::data::{assign_folds, Dataset};
use crate::error::{Error, Result};
use crate::learners::{LearnerSpec, Model};
use crate::seed;

pub const MIN_FOLDS: usize = 2;
pub const MAX_FOLDS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingSpec {
    pub folds: usize,
    pub level2: Box<LearnerSpec>,
    pub ensemble: Vec<LearnerSpec>,
}

impl StackingSpec {
    pub fn new(ensemble: Vec<LearnerSpec>, level2: LearnerSpec, folds: usize) -> Self {
        StackingSpec {
            folds,
            level2: Box::new(level2),
            ensemble,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensemble.is_empty() {
            return Err(Error::param("stacking ensemble is empty"));
        }
        if self.folds < MIN_FOLDS {
            return Err(Error::param(format!("stacking needs at least {MIN_FOLDS} folds, got {}", self.folds)));
        }
        for m in &self.ensemble {
            m.validate()?;
        }
        self.level2.validate()
    }

    /// Seed keys of the members: spec fingerprint mixed with how many
    /// identical specs precede it.
    fn member_keys(&self) -> Vec<u64> {
        let mut seen: HashMap<u64, u64> = HashMap::new();
        self.ensemble
            .iter()
            .map(|m| {
                let fp = m.fingerprint();
                let count = seen.entry(fp).or_insert(0);
                let key = seed::derive(fp, "occurrence", *count);
                *count += 1;
                key
            })
            .collect()
    }
}

/// Two-level model `x -> L2(L1_0(x), .., L1_n(x))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackedModel {
    level1: Vec<Arc<Model>>,
    level2: Arc<Model>,
}

impl StackedModel {
    pub fn level1(&self) -> &[Arc<Model>] {
        &self.level1
    }

    pub fn level2(&self) -> &Model {
        &self.level2
    }

    pub fn n_features(&self) -> usize {
        self.level1[0].n_features()
    }

    pub fn level1_outputs(&self, x: &[f64]) -> Vec<f64> {
        self.level1.iter().map(|m| m.predict(x)).collect()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.level2.predict(&self.level1_outputs(x))
    }
}

/// Builds `x -> l2(l1_0(x), .., l1_n(x))` from trained parts.
pub fn compose(level1: Vec<Arc<Model>>, level2: Arc<Model>) -> Result<StackedModel> {
    let Some(first) = level1.first() else {
        return Err(Error::param("cannot compose an empty level-1 list"));
    };
    if level2.n_features() != level1.len() {
        return Err(Error::Dimension {
            expected: level2.n_features(),
            actual: level1.len(),
        });
    }
    let p = first.n_features();
    if let Some(m) = level1.iter().find(|m| m.n_features() != p) {
        return Err(Error::Dimension {
            expected: p,
            actual: m.n_features(),
        });
    }
    Ok(StackedModel { level1, level2 })
}

/// The level-2 training set together with where each row came from.
#[derive(Debug, Clone)]
pub struct Level2Set {
    /// One row per training sample; features are level-1 predictions in
    /// ensemble order.
    pub data: Dataset,
    /// `sample[r]` is the index (into the original data) of level-2 row `r`.
    pub sample: Vec<usize>,
    /// Fold in which row `r` was held out.
    pub fold: Vec<usize>,
}

pub fn train_stacking(spec: &StackingSpec, data: &Dataset, seed_value: u64) -> Result<StackedModel> {
    train_stacking_with(spec, data, seed_value, None)
}

pub fn train_stacking_with(
    spec: &StackingSpec,
    data: &Dataset,
    seed_value: u64,
    cache: Option<&ModelCache>,
) -> Result<StackedModel> {
    let keys = spec.member_keys();
    let (level2_set, level1) = rayon::join(
        || level2_training_set(spec, data, seed_value, cache),
        || {
            spec.ensemble
                .par_iter()
                .zip(&keys)
                .map(|(member, &key)| {
                    let s = seed::derive_path(seed_value, "stack-l1-full", &[key]);
                    train_maybe_cached(member, data, s, cache).map_err(|e| provenance("full", member, e))
                })
                .collect::<Result<Vec<_>>>()
        },
    );
    let (level2_set, level1) = (level2_set?, level1?);
    let level2 = train_maybe_cached(&spec.level2, &level2_set.data, seed::derive(seed_value, "stack-l2", 0), cache)
        .map_err(|e| provenance("level2", &spec.level2, e))?;
    compose(level1, level2)
}

fn provenance(fold: &str, learner: &LearnerSpec, e: Error) -> Error {
    Error::Stacking {
        fold: fold.to_string(),
        learner: learner.display_name(),
        source: Box::new(e),
    }
}

/// Runs the cross-validated level-1 stage and assembles the level-2 training
/// rows, ordered by fold and then by sample index within the fold.
pub fn level2_training_set(
    spec: &StackingSpec,
    data: &Dataset,
    seed_value: u64,
    cache: Option<&ModelCache>,
) -> Result<Level2Set> {
    spec.validate()?;
    let n = data.n_samples();
    if spec.folds > n {
        return Err(Error::param(format!("stacking folds {} exceed the {n} samples", spec.folds)));
    }
    let mut rng = seed::rng(seed::derive(seed_value, "stack-folds", spec.folds as u64));
    let folds = assign_folds(n, spec.folds, &mut rng)?;
    let keys = spec.member_keys();
    let m = spec.ensemble.len();

    let tasks: Vec<(usize, usize)> = (0..spec.folds).flat_map(|j| (0..m).map(move |i| (j, i))).collect();
    let splits: Vec<(Vec<usize>, Dataset)> = (0..spec.folds)
        .map(|j| (folds.test_indices(j), data.subset(&folds.train_indices(j))))
        .collect();
    let columns = tasks
        .par_iter()
        .map(|&(j, i)| {
            let member = &spec.ensemble[i];
            let (test, train) = &splits[j];
            let s = seed::derive_path(seed_value, "stack-l1", &[j as u64, keys[i]]);
            let model = train_maybe_cached(member, train, s, cache).map_err(|e| provenance(&j.to_string(), member, e))?;
            Ok(test.iter().map(|&t| model.predict(data.row(t))).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut features = Vec::with_capacity(n * m);
    let mut targets = Vec::with_capacity(n);
    let mut sample = Vec::with_capacity(n);
    let mut fold = Vec::with_capacity(n);
    for (j, (test, _)) in splits.iter().enumerate() {
        for (r, &t) in test.iter().enumerate() {
            features.extend((0..m).map(|i| columns[j * m + i][r]));
            targets.push(data.target(t));
            sample.push(t);
            fold.push(j);
        }
    }
    let names = spec.ensemble.iter().map(LearnerSpec::display_name).collect();
    let l2 = Dataset::with_feature_names(format!("{}-level2", data.name()), names, features, targets)?;
    Ok(Level2Set { data: l2, sample, fold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth::synth_seeded, Generator, SynthSpec};
    use crate::learners::{Metric, NetSpec};

    fn small() -> Dataset {
        synth_seeded(&SynthSpec::new(Generator::SineMix, 0.1, 60), 3).unwrap()
    }

    #[test]
    fn mean_level2_ignores_members() {
        let d = Dataset::from_rows(
            "four",
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            vec![1.0, 2.0, 4.0, 9.0],
        )
        .unwrap();
        let spec = StackingSpec::new(vec![LearnerSpec::Mean, LearnerSpec::knn(1, 0.0, Metric::Euclidean)], LearnerSpec::Mean, 2);
        let m = train_stacking(&spec, &d, 5).unwrap();
        for x in [-10.0, 0.0, 1.5, 99.0] {
            assert!((m.predict(&[x]) - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_targets_with_pls_level2() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let d = Dataset::from_rows("c", &rows, vec![6.5; 10]).unwrap();
        let spec = StackingSpec::new(vec![LearnerSpec::Mean], LearnerSpec::pls(1), 3);
        let m = train_stacking(&spec, &d, 1).unwrap();
        assert_eq!(m.predict(&[3.0, 1.0]), 6.5);
    }

    #[test]
    fn level2_rows_cover_every_sample_once() {
        let d = small();
        let spec = StackingSpec::new(vec![LearnerSpec::Mean, LearnerSpec::pls(2)], LearnerSpec::Mean, 4);
        let set = level2_training_set(&spec, &d, 9, None).unwrap();
        assert_eq!(set.data.n_samples(), 60);
        assert_eq!(set.data.n_features(), 2);
        let mut s = set.sample.clone();
        s.sort();
        assert_eq!(s, (0..60).collect::<Vec<_>>());
        for (r, &t) in set.sample.iter().enumerate() {
            assert_eq!(set.data.target(r), d.target(t));
        }
        assert!(set.fold.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn reproducible_and_cache_transparent() {
        let d = small();
        let spec = StackingSpec::new(
            vec![LearnerSpec::pls(2), LearnerSpec::forest(3), LearnerSpec::knn(5, 1.0, Metric::Manhattan)],
            LearnerSpec::NeuralNet(NetSpec { hidden: 3, max_iter: 20, epsilon: 0.001 }),
            3,
        );
        let a = train_stacking(&spec, &d, 2).unwrap();
        let b = train_stacking(&spec, &d, 2).unwrap();
        let cache = ModelCache::new();
        let c = train_stacking_with(&spec, &d, 2, Some(&cache)).unwrap();
        let c2 = train_stacking_with(&spec, &d, 2, Some(&cache)).unwrap();
        assert!(cache.hits() > 0);
        for x in d.rows() {
            let y = a.predict(x).to_bits();
            assert_eq!(y, b.predict(x).to_bits());
            assert_eq!(y, c.predict(x).to_bits());
            assert_eq!(y, c2.predict(x).to_bits());
        }
    }

    #[test]
    fn member_seeds_follow_identity_not_position() {
        let d = small();
        let f = LearnerSpec::forest(4);
        let ab = StackingSpec::new(vec![f.clone(), LearnerSpec::Mean], LearnerSpec::Mean, 3);
        let ba = StackingSpec::new(vec![LearnerSpec::Mean, f], LearnerSpec::Mean, 3);
        let x = level2_training_set(&ab, &d, 4, None).unwrap();
        let y = level2_training_set(&ba, &d, 4, None).unwrap();
        for r in 0..d.n_samples() {
            assert_eq!(x.data.row(r)[0], y.data.row(r)[1]);
        }
    }

    #[test]
    fn errors() {
        let d = Dataset::from_rows("d", &[vec![0.0], vec![1.0]], vec![0.0, 1.0]).unwrap();
        assert!(train_stacking(&StackingSpec::new(vec![], LearnerSpec::Mean, 2), &d, 0).is_err());
        assert!(train_stacking(&StackingSpec::new(vec![LearnerSpec::Mean], LearnerSpec::Mean, 1), &d, 0).is_err());
        assert!(train_stacking(&StackingSpec::new(vec![LearnerSpec::Mean], LearnerSpec::Mean, 3), &d, 0).is_err());
        // Nested stacking that cannot split the inner fold's training data.
        let inner = LearnerSpec::Stacking(StackingSpec::new(vec![LearnerSpec::Mean], LearnerSpec::Mean, 4));
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let d4 = Dataset::from_rows("d4", &rows, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let err = train_stacking(&StackingSpec::new(vec![inner], LearnerSpec::Mean, 4), &d4, 0).unwrap_err();
        assert!(matches!(err, Error::Stacking { .. }), "{err}");
    }

    #[test]
    fn compose_checks_dimensions() {
        let d = small();
        let l1: Vec<Arc<Model>> = (0..2).map(|_| Arc::new(LearnerSpec::Mean.train(&d, 0).unwrap())).collect();
        let l2_data = Dataset::from_rows("l2", &[vec![0.0, 1.0, 2.0]], vec![1.0]).unwrap();
        let l2 = Arc::new(LearnerSpec::Mean.train(&l2_data, 0).unwrap());
        assert!(matches!(compose(l1, l2), Err(Error::Dimension { expected: 3, actual: 2 })));
    }
}
