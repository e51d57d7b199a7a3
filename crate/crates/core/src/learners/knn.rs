//! Distance-weighted k-nearest-neighbour regression.
//!
//! The prediction is `sum(w_i * y_i) / sum(w_i)` over the `k` nearest training
//! rows, with `w_i = 1 / d_i^alpha`. `alpha = 0` gives the plain neighbour
//! average; large `alpha` approaches 1-NN. Neighbours at distance zero take
//! over completely: their plain mean is returned.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Manhattan,
    Euclidean,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Manhattan => "manhattan",
            Metric::Euclidean => "euclidean",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    alpha: f64,
    metric: Metric,
    n_features: usize,
    features: Vec<f64>,
    targets: Vec<f64>,
}

pub fn train_knn(data: &Dataset, k: usize, alpha: f64, metric: Metric) -> Result<KnnModel> {
    if k < 1 {
        return Err(Error::param("k-NN needs k >= 1"));
    }
    if k > data.n_samples() {
        return Err(Error::param(format!(
            "k-NN k = {k} exceeds the {} training samples",
            data.n_samples()
        )));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("k-NN alpha must be finite and >= 0, got {alpha}")));
    }
    Ok(KnnModel {
        k,
        alpha,
        metric,
        n_features: data.n_features(),
        features: data.features().to_vec(),
        targets: data.targets().to_vec(),
    })
}

fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

impl KnnModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// The `k` nearest training rows as `(distance, row index)`, ordered by
    /// distance with ties broken by the lower row index.
    pub fn neighbours(&self, x: &[f64]) -> Vec<(f64, usize)> {
        let mut d: Vec<(f64, usize)> = self
            .features
            .chunks_exact(self.n_features)
            .enumerate()
            .map(|(i, row)| (self.metric.distance(x, row), i))
            .collect();
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, by_distance_then_index);
            d.truncate(self.k);
        }
        d.sort_unstable_by(by_distance_then_index);
        d
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let nb = self.neighbours(x);
        let exact: Vec<f64> = nb.iter().filter(|(d, _)| *d == 0.0).map(|&(_, i)| self.targets[i]).collect();
        if !exact.is_empty() {
            return exact.iter().sum::<f64>() / exact.len() as f64;
        }
        if self.alpha == 0.0 {
            return nb.iter().map(|&(_, i)| self.targets[i]).sum::<f64>() / nb.len() as f64;
        }
        // Weights relative to the nearest neighbour, in log space: d^-alpha
        // over- or underflows for alpha = 20 long before the ratio does.
        let log_min = nb[0].0.ln();
        let (mut num, mut den) = (0.0, 0.0);
        for &(d, i) in &nb {
            let w = (-self.alpha * (d.ln() - log_min)).exp();
            num += w * self.targets[i];
            den += w;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng;
    use rand::Rng;

    fn line(points: &[(f64, f64)]) -> Dataset {
        let rows: Vec<Vec<f64>> = points.iter().map(|p| vec![p.0]).collect();
        Dataset::from_rows("l", &rows, points.iter().map(|p| p.1).collect()).unwrap()
    }

    #[test]
    fn inverse_distance_weighting() {
        // Query at 0: neighbours at distances 1 and 2 with targets 0 and 3.
        let d = line(&[(1.0, 0.0), (2.0, 3.0), (10.0, 100.0)]);
        let m = train_knn(&d, 2, 1.0, Metric::Euclidean).unwrap();
        assert!((m.predict(&[0.0]) - 1.0).abs() < 1e-12);
        let m = train_knn(&d, 2, 0.0, Metric::Manhattan).unwrap();
        assert!((m.predict(&[0.0]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn exact_match_wins() {
        let d = line(&[(1.0, 7.0), (2.0, 3.0), (3.0, 5.0)]);
        for alpha in [0.0, 1.0, 20.0] {
            let m = train_knn(&d, 3, alpha, Metric::Euclidean).unwrap();
            assert_eq!(m.predict(&[2.0]), 3.0);
        }
        let dup = line(&[(1.0, 2.0), (1.0, 4.0), (3.0, 100.0)]);
        let m = train_knn(&dup, 3, 2.0, Metric::Manhattan).unwrap();
        assert_eq!(m.predict(&[1.0]), 3.0);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let d = line(&[(-1.0, 10.0), (1.0, 20.0), (1.0, 30.0)]);
        let m = train_knn(&d, 1, 0.0, Metric::Euclidean).unwrap();
        assert_eq!(m.predict(&[0.0]), 10.0);
        let m = train_knn(&d, 2, 0.0, Metric::Euclidean).unwrap();
        assert_eq!(m.predict(&[0.0]), 15.0);
    }

    #[test]
    fn large_alpha_is_stable() {
        let d = line(&[(1e-30, 1.0), (2e-30, 5.0), (1.0, 9.0)]);
        let m = train_knn(&d, 3, 20.0, Metric::Euclidean).unwrap();
        let y = m.predict(&[0.0]);
        assert!(y.is_finite());
        let w2 = 2f64.powi(-20);
        assert!((y - (1.0 + 5.0 * w2) / (1.0 + w2)).abs() < 1e-12);
    }

    #[test]
    fn range_checks() {
        let d = line(&[(0.0, 0.0), (1.0, 1.0)]);
        assert!(train_knn(&d, 0, 1.0, Metric::Euclidean).is_err());
        assert!(train_knn(&d, 3, 1.0, Metric::Euclidean).is_err());
    }

    #[test]
    fn one_neighbour_and_uniform_weights() {
        let mut r = rng(11);
        let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..3).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..60).map(|_| r.random_range(-5.0..5.0)).collect();
        let d = Dataset::from_rows("r", &rows, y.clone()).unwrap();
        let nn = train_knn(&d, 1, 3.0, Metric::Euclidean).unwrap();
        let avg = train_knn(&d, 7, 0.0, Metric::Manhattan).unwrap();
        for _ in 0..100 {
            let q: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
            let nearest = (0..60)
                .min_by(|&a, &b| Metric::Euclidean.distance(&q, &rows[a]).total_cmp(&Metric::Euclidean.distance(&q, &rows[b])))
                .unwrap();
            assert_eq!(nn.predict(&q), y[nearest]);
            let mut order: Vec<usize> = (0..60).collect();
            order.sort_by(|&a, &b| Metric::Manhattan.distance(&q, &rows[a]).total_cmp(&Metric::Manhattan.distance(&q, &rows[b])));
            let brute = order[..7].iter().map(|&i| y[i]).sum::<f64>() / 7.0;
            assert!((avg.predict(&q) - brute).abs() < 1e-12);
        }
    }
}
