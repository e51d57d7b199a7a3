//! Independent reference implementations used by the integration and
//! acceptance tests. Everything here is deliberately naive.

#![allow(dead_code)]

use evostack::learners::mlp::{Batch, Network};
use evostack::learners::Metric;

pub fn distance(metric: Metric, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
    }
}

/// All-pairs k-NN with weights `d^-alpha`; exact matches among the k
/// nearest are averaged.
pub fn knn_oracle(rows: &[Vec<f64>], y: &[f64], x: &[f64], k: usize, alpha: f64, metric: Metric) -> f64 {
    let mut all: Vec<(f64, usize)> = rows.iter().enumerate().map(|(i, r)| (distance(metric, x, r), i)).collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let nearest = &all[..k];
    let zero: Vec<f64> = nearest.iter().filter(|(d, _)| *d == 0.0).map(|&(_, i)| y[i]).collect();
    if !zero.is_empty() {
        return zero.iter().sum::<f64>() / zero.len() as f64;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &(d, i) in nearest {
        let w = d.powf(-alpha);
        num += w * y[i];
        den += w;
    }
    num / den
}

/// Sum of squared deviations from the mean.
pub fn sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - m) * (v - m)).sum()
}

/// Children's total SSE for the split `x[feature] <= threshold`.
pub fn split_sse(rows: &[Vec<f64>], y: &[f64], feature: usize, threshold: f64) -> f64 {
    let (mut l, mut r) = (Vec::new(), Vec::new());
    for (row, &t) in rows.iter().zip(y) {
        if row[feature] <= threshold {
            l.push(t);
        } else {
            r.push(t);
        }
    }
    sse(&l) + sse(&r)
}

/// Every admissible `(feature, threshold, children SSE)`: midpoints between
/// distinct values, both sides holding at least `min_leaf` rows.
pub fn candidate_splits(rows: &[Vec<f64>], y: &[f64], min_leaf: usize) -> Vec<(usize, f64, f64)> {
    let p = rows[0].len();
    let mut out = Vec::new();
    for f in 0..p {
        let mut values: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for w in values.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let n_left = rows.iter().filter(|r| r[f] <= t).count();
            if n_left < min_leaf || rows.len() - n_left < min_leaf {
                continue;
            }
            out.push((f, t, split_sse(rows, y, f, t)));
        }
    }
    out
}

/// The admissible split with the smallest children SSE.
pub fn exhaustive_split(rows: &[Vec<f64>], y: &[f64], min_leaf: usize) -> Option<(usize, f64, f64)> {
    candidate_splits(rows, y, min_leaf)
        .into_iter()
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Least squares with intercept via the normal equations on centred data.
/// Returns `(intercept, coefficients)`.
pub fn ols(rows: &[Vec<f64>], y: &[f64]) -> (f64, Vec<f64>) {
    let n = rows.len() as f64;
    let p = rows[0].len();
    let xm: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let ym = y.iter().sum::<f64>() / n;
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (r, &t) in rows.iter().zip(y) {
        for i in 0..p {
            xty[i] += (r[i] - xm[i]) * (t - ym);
            for j in 0..p {
                xtx[i][j] += (r[i] - xm[i]) * (r[j] - xm[j]);
            }
        }
    }
    let beta = solve(xtx, xty);
    let intercept = ym - beta.iter().zip(&xm).map(|(b, m)| b * m).sum::<f64>();
    (intercept, beta)
}

/// Central differences of the batch loss with respect to every parameter.
pub fn numeric_gradient(net: &Network, batch: &Batch, step: f64) -> Vec<f64> {
    let mut probe = net.clone();
    (0..net.params().len())
        .map(|i| {
            let orig = probe.params()[i];
            probe.params_mut()[i] = orig + step;
            let up = probe.loss(batch);
            probe.params_mut()[i] = orig - step;
            let down = probe.loss(batch);
            probe.params_mut()[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// `||a - b|| / max(||a||, ||b||)`, or 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Pearson chi-square statistic of `counts` against `probabilities`.
pub fn chi_square(counts: &[usize], probabilities: &[f64]) -> f64 {
    let total: usize = counts.iter().sum();
    counts
        .iter()
        .zip(probabilities)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}
