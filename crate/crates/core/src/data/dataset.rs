use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Fingerprint;

/// `n` labelled samples of dimension `p`, features stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    feature_names: Vec<String>,
    features: Vec<f64>,
    targets: Vec<f64>,
    n_features: usize,
}

impl Dataset {
    /// Builds a dataset from row-major `features` (`targets.len()` rows).
    pub fn new(name: impl Into<String>, features: Vec<f64>, targets: Vec<f64>, n_features: usize) -> Result<Self> {
        let names = (0..n_features).map(|j| format!("x{j}")).collect();
        Self::with_feature_names(name, names, features, targets)
    }

    pub fn with_feature_names(
        name: impl Into<String>,
        feature_names: Vec<String>,
        features: Vec<f64>,
        targets: Vec<f64>,
    ) -> Result<Self> {
        let p = feature_names.len();
        let n = targets.len();
        if n == 0 {
            return Err(Error::Dataset("dataset has no samples".into()));
        }
        if p == 0 {
            return Err(Error::Dataset("dataset has no features".into()));
        }
        if features.len() != n * p {
            return Err(Error::Dataset(format!(
                "feature matrix has {} values, expected {n} rows x {p} columns",
                features.len()
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::Dataset(format!(
                "non-finite feature at row {}, column {}",
                i / p,
                i % p
            )));
        }
        if let Some(i) = targets.iter().position(|v| !v.is_finite()) {
            return Err(Error::Dataset(format!("non-finite target at row {i}")));
        }
        Ok(Dataset {
            name: name.into(),
            feature_names,
            features,
            targets,
            n_features: p,
        })
    }

    /// Convenience constructor from a list of rows.
    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != p) {
            return Err(Error::Dataset(format!("row {i} has {} values, expected {p}", rows[i].len())));
        }
        if rows.len() != targets.len() {
            return Err(Error::Dataset(format!(
                "{} feature rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        Self::new(name, rows.concat(), targets, p)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_samples(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.n_features)
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    /// Rows picked by `indices`, in that order. Repeats are allowed, which is
    /// what bootstrap resampling needs.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            targets.push(self.targets[i]);
        }
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            features,
            targets,
            n_features: self.n_features,
        }
    }

    /// Rows *not* listed in `excluded` (sorted or not), in index order.
    pub fn complement(&self, excluded: &[usize]) -> Dataset {
        let mut keep = vec![true; self.n_samples()];
        for &i in excluded {
            keep[i] = false;
        }
        let idx: Vec<usize> = (0..self.n_samples()).filter(|&i| keep[i]).collect();
        self.subset(&idx)
    }

    pub fn target_mean(&self) -> f64 {
        self.targets.iter().sum::<f64>() / self.n_samples() as f64
    }

    /// Population standard deviation of the targets.
    pub fn target_std(&self) -> f64 {
        let m = self.target_mean();
        let ss: f64 = self.targets.iter().map(|y| (y - m) * (y - m)).sum();
        (ss / self.n_samples() as f64).sqrt()
    }

    /// Content hash over shape, feature values and targets.
    pub fn fingerprint(&self) -> u64 {
        let mut fp = Fingerprint::new();
        fp.u64(self.n_samples() as u64).u64(self.n_features as u64);
        for &v in &self.features {
            fp.f64(v);
        }
        for &y in &self.targets {
            fp.f64(y);
        }
        fp.finish()
    }
}
