//! Single-target partial least squares (PLS1) fitted with NIPALS.
//!
//! Features and target are centred; each component extracts a weight vector
//! `w`, scores `t = X w`, loadings `p = X't / t't` and the target coefficient
//! `q = y't / t't`, then deflates `X` only. The regression coefficients are
//! `B = W (P'W)^-1 q`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

const TOLERANCE: f64 = 1e-12;
const MAX_INNER_ITER: usize = 500;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlsModel {
    x_mean: Vec<f64>,
    y_mean: f64,
    coefficients: Vec<f64>,
    requested: usize,
    components: usize,
}

impl PlsModel {
    pub fn n_features(&self) -> usize {
        self.x_mean.len()
    }

    /// Number of latent components actually extracted. May be lower than
    /// requested when the deflated data runs out of signal.
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn requested_components(&self) -> usize {
        self.requested
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.y_mean
            + x.iter()
                .zip(&self.x_mean)
                .zip(&self.coefficients)
                .map(|((v, m), b)| (v - m) * b)
                .sum::<f64>()
    }
}

/// Trains PLS with exactly `l` requested components, `1 <= l <= min(p, n - 1)`.
pub fn train_pls(data: &Dataset, l: usize) -> Result<PlsModel> {
    let limit = data.n_features().min(data.n_samples().saturating_sub(1));
    if l < 1 || l > limit {
        return Err(Error::param(format!(
            "PLS component count {l} outside 1..={limit} (p = {}, n = {})",
            data.n_features(),
            data.n_samples()
        )));
    }
    Ok(fit_pls(data, l))
}

pub(crate) fn fit_pls(data: &Dataset, l: usize) -> PlsModel {
    let n = data.n_samples();
    let p = data.n_features();
    let x_mean: Vec<f64> = (0..p)
        .map(|j| data.rows().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let y_mean = data.target_mean();
    let mut x = DMatrix::from_fn(n, p, |i, j| data.row(i)[j] - x_mean[j]);
    let y = DVector::from_iterator(n, data.targets().iter().map(|v| v - y_mean));

    let x0_norm = x.norm();
    let mut ws: Vec<DVector<f64>> = Vec::new();
    let mut ps: Vec<DVector<f64>> = Vec::new();
    let mut qs: Vec<f64> = Vec::new();

    for _ in 0..l {
        let Some((w, t)) = nipals_component(&x, &y, x0_norm) else {
            break;
        };
        let tt = t.dot(&t);
        let load = x.tr_mul(&t) / tt;
        let q = y.dot(&t) / tt;
        x -= &t * load.transpose();
        ws.push(w);
        ps.push(load);
        qs.push(q);
    }

    let components = ws.len();
    let coefficients = if components == 0 {
        vec![0.0; p]
    } else {
        let w = DMatrix::from_columns(&ws);
        let pm = DMatrix::from_columns(&ps);
        let q = DVector::from_vec(qs);
        let ptw = pm.tr_mul(&w);
        match ptw.lu().solve(&q) {
            Some(z) => (w * z).iter().copied().collect(),
            None => vec![0.0; p],
        }
    };
    PlsModel {
        x_mean,
        y_mean,
        coefficients,
        requested: l,
        components,
    }
}

/// One NIPALS component on the current deflated `x`. Returns `None` when the
/// remaining covariance with `y` is negligible relative to the original
/// feature scale `x0_norm`.
fn nipals_component(x: &DMatrix<f64>, y: &DVector<f64>, x0_norm: f64) -> Option<(DVector<f64>, DVector<f64>)> {
    let mut u = y.clone();
    let mut t_old: Option<DVector<f64>> = None;
    let mut result = None;
    for _ in 0..MAX_INNER_ITER {
        let mut w = x.tr_mul(&u);
        let norm = w.norm();
        if norm == 0.0 || norm <= TOLERANCE * x0_norm * u.norm() {
            return None;
        }
        w /= norm;
        let t = x * &w;
        let tt = t.dot(&t);
        if tt <= (TOLERANCE * x0_norm).powi(2) {
            return None;
        }
        let q = y.dot(&t) / tt;
        if q == 0.0 {
            return None;
        }
        u = y / q;
        let converged = t_old
            .as_ref()
            .is_some_and(|old| (&t - old).norm() <= TOLERANCE * t.norm());
        t_old = Some(t.clone());
        result = Some((w, t));
        if converged {
            break;
        }
    }
    result
}
