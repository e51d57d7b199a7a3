//! Held-out error estimation: k-fold cross-validation and a single random
//! proportional split, both scored by RMSE.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{assign_folds, Dataset};
use crate::ensembles::ModelCache;
use crate::error::{Error, Result};
use crate::learners::LearnerSpec;
use crate::seed;

/// Root mean squared error between paired predictions and truths.
pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.len() != truths.len() {
        return Err(Error::param(format!(
            "rmse: {} predictions vs {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::param("rmse of an empty set"));
    }
    let sse: f64 = predictions.iter().zip(truths).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / predictions.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    CrossValidation { folds: usize },
    Proportional { train_ratio: f64 },
}

impl std::fmt::Display for EvalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalMode::CrossValidation { folds } => write!(f, "cv{folds}"),
            EvalMode::Proportional { train_ratio } => write!(f, "split{train_ratio}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub learner: String,
    pub mode: EvalMode,
    pub seed: u64,
    /// RMSE of each held-out part, by fold index.
    pub fold_rmse: Vec<f64>,
    /// RMSE over all held-out predictions together.
    pub pooled_rmse: f64,
    /// Held-out sample indices (ascending) and their predictions.
    pub held_out: Vec<usize>,
    pub predictions: Vec<f64>,
    /// RMSE of mean regression under the same split, when computed.
    pub mean_reference: Option<f64>,
}

impl EvalReport {
    /// Mean-regression RMSE divided by this learner's RMSE.
    pub fn mean_cmp(&self) -> Option<f64> {
        self.mean_reference.map(|r| r / self.pooled_rmse.max(f64::MIN_POSITIVE))
    }

    /// CSV block: one header line and one data line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("learner,mode,seed,pooled_rmse,mean_reference_rmse,mean_cmp,fold_rmse\n");
        let folds: Vec<String> = self.fold_rmse.iter().map(f64::to_string).collect();
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            self.learner,
            self.mode,
            self.seed,
            self.pooled_rmse,
            opt(self.mean_reference),
            opt(self.mean_cmp()),
            folds.join(";")
        );
        s
    }
}

pub fn cross_validate(spec: &LearnerSpec, data: &Dataset, k: usize, seed_value: u64) -> Result<EvalReport> {
    cross_validate_with(spec, data, k, seed_value, None)
}

/// k-fold cross-validation. Folds come from `derive(seed, "cv-folds", k)`;
/// the model for fold `j` is trained with `derive(seed, "cv-train", j)`.
pub fn cross_validate_with(
    spec: &LearnerSpec,
    data: &Dataset,
    k: usize,
    seed_value: u64,
    cache: Option<&ModelCache>,
) -> Result<EvalReport> {
    spec.validate()?;
    let n = data.n_samples();
    let folds = assign_folds(n, k, &mut seed::rng(seed::derive(seed_value, "cv-folds", k as u64)))?;
    let per_fold = (0..k)
        .into_par_iter()
        .map(|j| {
            let test = folds.test_indices(j);
            let train = data.subset(&folds.train_indices(j));
            let s = seed::derive(seed_value, "cv-train", j as u64);
            let model = match cache {
                Some(c) => c.get_or_train(spec, &train, s),
                None => spec.train_with(&train, s, None).map(std::sync::Arc::new),
            }
            .map_err(|e| Error::Fold { fold: j, source: Box::new(e) })?;
            Ok(test.iter().map(|&t| model.predict(data.row(t))).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut predictions = vec![0.0; n];
    let mut fold_rmse = Vec::with_capacity(k);
    for (j, preds) in per_fold.iter().enumerate() {
        let test = folds.test_indices(j);
        let truths: Vec<f64> = test.iter().map(|&t| data.target(t)).collect();
        fold_rmse.push(rmse(preds, &truths)?);
        for (&t, &p) in test.iter().zip(preds) {
            predictions[t] = p;
        }
    }
    let pooled_rmse = rmse(&predictions, data.targets())?;
    Ok(EvalReport {
        learner: spec.display_name(),
        mode: EvalMode::CrossValidation { folds: k },
        seed: seed_value,
        fold_rmse,
        pooled_rmse,
        held_out: (0..n).collect(),
        predictions,
        mean_reference: None,
    })
}

/// Cross-validation plus the mean-regression reference on identical folds.
pub fn cross_validate_with_reference(
    spec: &LearnerSpec,
    data: &Dataset,
    k: usize,
    seed_value: u64,
) -> Result<EvalReport> {
    let mut report = cross_validate(spec, data, k, seed_value)?;
    let reference = cross_validate(&LearnerSpec::Mean, data, k, seed_value)?;
    report.mean_reference = Some(reference.pooled_rmse);
    Ok(report)
}

/// Sizes of a proportional split: `floor(ratio * n)` for training, the rest
/// for testing.
pub fn split_sizes(n: usize, train_ratio: f64) -> Result<(usize, usize)> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::param(format!("train ratio must be in (0, 1), got {train_ratio}")));
    }
    let train = crate::data::floor_tolerant(train_ratio * n as f64).min(n);
    if train == 0 || train == n {
        return Err(Error::param(format!(
            "train ratio {train_ratio} on {n} samples leaves an empty part ({train} / {})",
            n - train
        )));
    }
    Ok((train, n - train))
}

/// One random train/test split. The caller supplies a fresh seed whenever a
/// new split is wanted.
pub fn proportional_eval(spec: &LearnerSpec, data: &Dataset, train_ratio: f64, seed_value: u64) -> Result<EvalReport> {
    proportional_eval_with(spec, data, train_ratio, seed_value, None)
}

pub fn proportional_eval_with(
    spec: &LearnerSpec,
    data: &Dataset,
    train_ratio: f64,
    seed_value: u64,
    cache: Option<&ModelCache>,
) -> Result<EvalReport> {
    spec.validate()?;
    let n = data.n_samples();
    let (n_train, _) = split_sizes(n, train_ratio)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed::derive(seed_value, "split", 0)));
    let mut train_idx = order[..n_train].to_vec();
    let mut test_idx = order[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let train = data.subset(&train_idx);
    let s = seed::derive(seed_value, "split-train", 0);
    let model = match cache {
        Some(c) => c.get_or_train(spec, &train, s),
        None => spec.train_with(&train, s, None).map(std::sync::Arc::new),
    }
    .map_err(|e| Error::Fold { fold: 0, source: Box::new(e) })?;
    let predictions: Vec<f64> = test_idx.iter().map(|&t| model.predict(data.row(t))).collect();
    let truths: Vec<f64> = test_idx.iter().map(|&t| data.target(t)).collect();
    let r = rmse(&predictions, &truths)?;
    Ok(EvalReport {
        learner: spec.display_name(),
        mode: EvalMode::Proportional { train_ratio },
        seed: seed_value,
        fold_rmse: vec![r],
        pooled_rmse: r,
        held_out: test_idx,
        predictions,
        mean_reference: None,
    })
}
