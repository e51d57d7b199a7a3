use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;

/// Predicts the same value for every input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantModel {
    value: f64,
    n_features: usize,
}

impl ConstantModel {
    pub fn new(value: f64, n_features: usize) -> Self {
        ConstantModel { value, n_features }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn predict(&self, _x: &[f64]) -> f64 {
        self.value
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }
}

/// Mean regression: the average training target, regardless of input.
pub fn train_mean(data: &Dataset) -> Result<ConstantModel> {
    Ok(ConstantModel::new(data.target_mean(), data.n_features()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averages_targets() {
        let d = Dataset::from_rows("d", &[vec![1.0], vec![9.0], vec![-3.0]], vec![2.0, 4.0, 6.0]).unwrap();
        let m = train_mean(&d).unwrap();
        assert_eq!(m.predict(&[100.0]), 4.0);
        let d = Dataset::from_rows("d", &[vec![1.0]], vec![5.0]).unwrap();
        assert_eq!(train_mean(&d).unwrap().predict(&[0.0]), 5.0);
    }

    #[test]
    fn rank_design_mean() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for rank in 1..=26 {
            for _ in 0..120 {
                rows.push(vec![0.0]);
                y.push(f64::from(rank));
            }
        }
        let d = Dataset::from_rows("ranks", &rows, y).unwrap();
        assert!((train_mean(&d).unwrap().value() - 13.5).abs() < 1e-12);
    }
}
