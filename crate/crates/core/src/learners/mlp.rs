//! Single-hidden-layer feedforward network trained with iRPROP-.
//!
//! Topology `p -> hidden -> 1` with `tanh` on the hidden and output units.
//! Inputs are standardised with training statistics and targets are mapped
//! affinely onto `[-1, 1]`; predictions are mapped back. Training is
//! full-batch and stops at the first epoch whose training MSE (in the scaled
//! space) is below `epsilon`, or after `max_iter` epochs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ConstantModel, Model};
use crate::data::{fit_scaler, Dataset, TargetScaler};
use crate::error::{Error, Result};
use crate::seed;

pub const ETA_PLUS: f64 = 1.2;
pub const ETA_MINUS: f64 = 0.5;
pub const DELTA_INIT: f64 = 0.1;
pub const DELTA_MIN: f64 = 1e-6;
pub const DELTA_MAX: f64 = 50.0;
const INIT_RANGE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub hidden: usize,
    pub max_iter: usize,
    pub epsilon: f64,
}

impl NetSpec {
    pub fn display_name(&self) -> String {
        format!("nn-h{}-it{}-e{}", self.hidden, self.max_iter, self.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden < 1 || self.max_iter < 1 {
            return Err(Error::param("neural net needs hidden >= 1 and max_iter >= 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param(format!("neural net epsilon must be > 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Flat weight vector of a `inputs -> hidden -> 1` network.
///
/// Layout: hidden weights row by row (`hidden x inputs`), hidden biases,
/// output weights, output bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    inputs: usize,
    hidden: usize,
    params: Vec<f64>,
}

/// Column-major training matrix plus targets, the layout the epoch loops use.
#[derive(Debug, Clone)]
pub struct Batch {
    n: usize,
    columns: Vec<f64>,
    targets: Vec<f64>,
}

impl Batch {
    /// `rows` are row-major with `p` values each.
    pub fn new(rows: &[f64], p: usize, targets: &[f64]) -> Self {
        let n = targets.len();
        assert_eq!(rows.len(), n * p);
        let mut columns = vec![0.0; n * p];
        for i in 0..n {
            for j in 0..p {
                columns[j * n + i] = rows[i * p + j];
            }
        }
        Batch {
            n,
            columns,
            targets: targets.to_vec(),
        }
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.n..(j + 1) * self.n]
    }
}

impl Network {
    pub fn param_count(inputs: usize, hidden: usize) -> usize {
        hidden * (inputs + 2) + 1
    }

    pub fn from_params(inputs: usize, hidden: usize, params: Vec<f64>) -> Self {
        assert_eq!(params.len(), Self::param_count(inputs, hidden));
        Network { inputs, hidden, params }
    }

    /// Weights uniform in `[-0.5, 0.5]`.
    pub fn random<R: Rng + ?Sized>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let params = (0..Self::param_count(inputs, hidden))
            .map(|_| rng.random_range(-INIT_RANGE..=INIT_RANGE))
            .collect();
        Network { inputs, hidden, params }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], f64) {
        let (h, p) = (self.hidden, self.inputs);
        let (w1, rest) = self.params.split_at(h * p);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        (w1, b1, w2, b2[0])
    }

    /// Output for one (already standardised) input.
    pub fn forward(&self, x: &[f64]) -> f64 {
        let (w1, b1, w2, b2) = self.split();
        let mut s = b2;
        for h in 0..self.hidden {
            let z: f64 = b1[h] + w1[h * self.inputs..(h + 1) * self.inputs].iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            s += w2[h] * tanh(z);
        }
        tanh(s)
    }

    /// Mean squared error over the batch and its gradient with respect to
    /// every parameter, in parameter order.
    pub fn loss_and_gradient(&self, batch: &Batch) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let mut scratch = Scratch::new(self.hidden, batch.n);
        let mse = self.epoch(batch, &mut scratch, &mut grad);
        (mse, grad)
    }

    /// Mean squared error only.
    pub fn loss(&self, batch: &Batch) -> f64 {
        let mut s = 0.0;
        let mut x = vec![0.0; self.inputs];
        for i in 0..batch.n {
            for (j, v) in x.iter_mut().enumerate() {
                *v = batch.column(j)[i];
            }
            let e = self.forward(&x) - batch.targets[i];
            s += e * e;
        }
        s / batch.n as f64
    }

    fn epoch(&self, batch: &Batch, sc: &mut Scratch, grad: &mut [f64]) -> f64 {
        let (h_n, p, n) = (self.hidden, self.inputs, batch.n);
        let (w1, b1, w2, b2) = self.split();

        // Forward pass, one hidden unit at a time over all samples.
        sc.out.fill(b2);
        for h in 0..h_n {
            let act = &mut sc.act[h * n..(h + 1) * n];
            act.fill(b1[h]);
            for j in 0..p {
                let w = w1[h * p + j];
                for (a, x) in act.iter_mut().zip(batch.column(j)) {
                    *a += w * x;
                }
            }
            for a in act.iter_mut() {
                *a = tanh(*a);
            }
            for (o, a) in sc.out.iter_mut().zip(act.iter()) {
                *o += w2[h] * a;
            }
        }
        let mut sse = 0.0;
        let scale = 2.0 / n as f64;
        for i in 0..n {
            let o = tanh(sc.out[i]);
            let e = o - batch.targets[i];
            sse += e * e;
            sc.delta_out[i] = scale * e * (1.0 - o * o);
        }

        // Backward pass.
        let (g_w1, rest) = grad.split_at_mut(h_n * p);
        let (g_b1, rest) = rest.split_at_mut(h_n);
        let (g_w2, g_b2) = rest.split_at_mut(h_n);
        g_b2[0] = sc.delta_out.iter().sum();
        for h in 0..h_n {
            let act = &sc.act[h * n..(h + 1) * n];
            let mut gw2 = 0.0;
            for (d, a) in sc.delta_out.iter().zip(act) {
                gw2 += d * a;
            }
            g_w2[h] = gw2;
            let v = w2[h];
            for ((dh, d), a) in sc.delta_hidden.iter_mut().zip(&sc.delta_out).zip(act) {
                *dh = d * v * (1.0 - a * a);
            }
            g_b1[h] = sc.delta_hidden.iter().sum();
            for j in 0..p {
                let mut g = 0.0;
                for (dh, x) in sc.delta_hidden.iter().zip(batch.column(j)) {
                    g += dh * x;
                }
                g_w1[h * p + j] = g;
            }
        }
        sse / n as f64
    }
}

/// `tanh` through one `exp` call; about twice as fast as `f64::tanh` and
/// within a few ulps of it.
#[inline]
fn tanh(x: f64) -> f64 {
    let e = (2.0 * x.clamp(-20.0, 20.0)).exp();
    (e - 1.0) / (e + 1.0)
}

struct Scratch {
    act: Vec<f64>,
    out: Vec<f64>,
    delta_out: Vec<f64>,
    delta_hidden: Vec<f64>,
}

impl Scratch {
    fn new(hidden: usize, n: usize) -> Self {
        Scratch {
            act: vec![0.0; hidden * n],
            out: vec![0.0; n],
            delta_out: vec![0.0; n],
            delta_hidden: vec![0.0; n],
        }
    }
}

/// Per-weight iRPROP- state.
struct Rprop {
    step: Vec<f64>,
    prev_grad: Vec<f64>,
}

impl Rprop {
    fn new(n: usize) -> Self {
        Rprop {
            step: vec![DELTA_INIT; n],
            prev_grad: vec![0.0; n],
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        for k in 0..params.len() {
            let g = grad[k];
            let s = g * self.prev_grad[k];
            if s > 0.0 {
                self.step[k] = (self.step[k] * ETA_PLUS).min(DELTA_MAX);
            } else if s < 0.0 {
                self.step[k] = (self.step[k] * ETA_MINUS).max(DELTA_MIN);
                self.prev_grad[k] = 0.0;
                continue;
            }
            if g > 0.0 {
                params[k] -= self.step[k];
            } else if g < 0.0 {
                params[k] += self.step[k];
            }
            self.prev_grad[k] = g;
        }
    }
}

/// Trains `net` in place; returns the per-epoch training MSE trace.
pub fn rprop_train(net: &mut Network, batch: &Batch, max_iter: usize, epsilon: f64) -> Vec<f64> {
    let mut scratch = Scratch::new(net.hidden, batch.n);
    let mut grad = vec![0.0; net.params.len()];
    let mut rprop = Rprop::new(net.params.len());
    let mut trace = Vec::with_capacity(max_iter);
    for _ in 0..max_iter {
        let mse = net.epoch(batch, &mut scratch, &mut grad);
        trace.push(mse);
        if mse < epsilon {
            break;
        }
        rprop.update(&mut net.params, &grad);
    }
    trace
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetModel {
    net: Network,
    x_mean: Vec<f64>,
    x_scale: Vec<f64>,
    scaler: TargetScaler,
    epochs: usize,
    final_mse: f64,
}

impl NetModel {
    pub fn n_features(&self) -> usize {
        self.x_mean.len()
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    /// Training MSE (scaled space) of the last recorded epoch.
    pub fn final_mse(&self) -> f64 {
        self.final_mse
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let z: Vec<f64> = x
            .iter()
            .zip(&self.x_mean)
            .zip(&self.x_scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect();
        self.scaler.inverse(self.net.forward(&z))
    }
}

/// Trains a network and returns it with its training-error trace.
pub fn train_mlp_rprop(data: &Dataset, spec: &NetSpec, seed_value: u64) -> Result<(NetModel, Vec<f64>)> {
    spec.validate()?;
    let scaler = fit_scaler(data.targets())?;
    let (n, p) = (data.n_samples(), data.n_features());
    let x_mean: Vec<f64> = (0..p).map(|j| data.rows().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let x_scale: Vec<f64> = (0..p)
        .map(|j| {
            let var = data.rows().map(|r| (r[j] - x_mean[j]).powi(2)).sum::<f64>() / n as f64;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(n * p);
    for r in data.rows() {
        rows.extend(r.iter().enumerate().map(|(j, v)| (v - x_mean[j]) / x_scale[j]));
    }
    let targets: Vec<f64> = data.targets().iter().map(|&y| scaler.scale(y)).collect();
    let batch = Batch::new(&rows, p, &targets);

    let mut rng = seed::rng(seed::derive(seed_value, "net-init", 0));
    let mut net = Network::random(p, spec.hidden, &mut rng);
    let trace = rprop_train(&mut net, &batch, spec.max_iter, spec.epsilon);
    let model = NetModel {
        net,
        x_mean,
        x_scale,
        scaler,
        epochs: trace.len(),
        final_mse: *trace.last().expect("max_iter >= 1"),
    };
    Ok((model, trace))
}

/// Dispatcher entry: constant targets fall back to a constant model.
pub(crate) fn train_net(data: &Dataset, spec: &NetSpec, seed_value: u64) -> Result<Model> {
    match train_mlp_rprop(data, spec, seed_value) {
        Ok((m, _)) => Ok(Model::Net(m)),
        Err(Error::DegenerateRange(v)) => Ok(Model::Constant(ConstantModel::new(v, data.n_features()))),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LearnerSpec;

    #[test]
    fn tanh_matches_std() {
        for i in -4000..=4000 {
            let x = i as f64 / 100.0 + 1e-3;
            assert!((tanh(x) - x.tanh()).abs() < 1e-15, "{x}");
        }
        assert_eq!(tanh(1e6), 1.0);
        assert_eq!(tanh(-1e6), -1.0);
    }

    fn identity_data() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![-1.0 + 2.0 * i as f64 / 49.0]).collect();
        let y = rows.iter().map(|r| r[0]).collect();
        Dataset::from_rows("id", &rows, y).unwrap()
    }

    #[test]
    fn fits_identity() {
        let spec = NetSpec { hidden: 10, max_iter: 500, epsilon: 0.001 };
        let (m, trace) = train_mlp_rprop(&identity_data(), &spec, 1).unwrap();
        assert!(*trace.last().unwrap() < 0.001, "final mse {}", trace.last().unwrap());
        assert!(trace.len() < 500);
        assert!((m.predict(&[0.5]) - 0.5).abs() < 0.1);
    }

    #[test]
    fn stopping_rule() {
        let d = identity_data();
        let spec = NetSpec { hidden: 3, max_iter: 40, epsilon: 0.02 };
        let (_, trace) = train_mlp_rprop(&d, &spec, 3).unwrap();
        let first_below = trace.iter().position(|&e| e < spec.epsilon);
        match first_below {
            Some(k) => assert_eq!(k + 1, trace.len()),
            None => assert_eq!(trace.len(), spec.max_iter),
        }
        let spec = NetSpec { hidden: 3, max_iter: 7, epsilon: 1e-12 };
        assert_eq!(train_mlp_rprop(&d, &spec, 3).unwrap().1.len(), 7);
    }

    #[test]
    fn constant_targets_give_constant_model() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_rows("c", &rows, vec![7.0; 10]).unwrap();
        let m = LearnerSpec::net(5, 10, 0.01).train(&d, 0).unwrap();
        assert_eq!(m.predict(&[-4.0]), 7.0);
        assert!(matches!(train_mlp_rprop(&d, &NetSpec { hidden: 5, max_iter: 10, epsilon: 0.01 }, 0), Err(Error::DegenerateRange(_))));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seed::rng(5);
        let net = Network::random(2, 3, &mut rng);
        let rows: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..8).map(|_| rng.random_range(-0.9..0.9)).collect();
        let batch = Batch::new(&rows, 2, &y);
        let (mse, grad) = net.loss_and_gradient(&batch);
        assert!((mse - net.loss(&batch)).abs() < 1e-12);
        for k in 0..grad.len() {
            let mut plus = net.clone();
            plus.params_mut()[k] += 1e-5;
            let mut minus = net.clone();
            minus.params_mut()[k] -= 1e-5;
            let fd = (plus.loss(&batch) - minus.loss(&batch)) / 2e-5;
            assert!((fd - grad[k]).abs() <= 1e-4 * fd.abs().max(1e-6), "param {k}: {fd} vs {}", grad[k]);
        }
    }

    #[test]
    fn reproducible() {
        let d = identity_data();
        let spec = NetSpec { hidden: 4, max_iter: 30, epsilon: 1e-6 };
        let a = train_mlp_rprop(&d, &spec, 8).unwrap().0;
        let b = train_mlp_rprop(&d, &spec, 8).unwrap().0;
        assert_eq!(a.predict(&[0.3]).to_bits(), b.predict(&[0.3]).to_bits());
    }
}
