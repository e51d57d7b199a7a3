//! CART regression trees grown by greedy variance reduction.
//!
//! At every node `mtry` features are drawn without replacement; for each, the
//! candidate thresholds are the midpoints between consecutive distinct sorted
//! values, subject to both children holding at least `min_leaf` samples. The
//! split with the largest reduction in squared error wins (first feature
//! drawn, then lowest threshold, on ties). Trees are not pruned.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub mtry: usize,
    pub min_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeModel {
    nodes: Vec<Node>,
    n_features: usize,
}

impl TreeModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// `(feature, threshold)` of the root, or `None` for a single leaf.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Leaf(_) => None,
            Node::Split { feature, threshold, .. } => Some((feature, threshold)),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

/// Grows one tree on all rows of `data`.
pub fn train_regression_tree(data: &Dataset, mtry: usize, min_leaf: usize, seed_value: u64) -> Result<TreeModel> {
    let indices: Vec<usize> = (0..data.n_samples()).collect();
    grow(data, &indices, TreeParams { mtry, min_leaf }, seed_value)
}

/// Grows one tree on the rows listed in `indices` (repeats allowed).
pub(crate) fn grow(data: &Dataset, indices: &[usize], params: TreeParams, seed_value: u64) -> Result<TreeModel> {
    let p = data.n_features();
    if params.mtry < 1 || params.mtry > p {
        return Err(Error::param(format!("tree mtry must be in 1..={p}, got {}", params.mtry)));
    }
    if params.min_leaf < 1 {
        return Err(Error::param("tree min_leaf must be at least 1"));
    }
    if indices.is_empty() {
        return Err(Error::Dataset("cannot grow a tree on zero samples".into()));
    }
    let mut builder = Builder {
        data,
        params,
        rng: seed::rng(seed_value),
        nodes: Vec::new(),
        order: Vec::with_capacity(indices.len()),
    };
    let mut idx = indices.to_vec();
    builder.build(&mut idx);
    Ok(TreeModel { nodes: builder.nodes, n_features: p })
}

struct Builder<'a> {
    data: &'a Dataset,
    params: TreeParams,
    rng: seed::StdRng,
    nodes: Vec<Node>,
    order: Vec<(f64, f64)>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn build(&mut self, idx: &mut [usize]) -> usize {
        let at = self.nodes.len();
        let n = idx.len();
        let mean = idx.iter().map(|&i| self.data.target(i)).sum::<f64>() / n as f64;
        self.nodes.push(Node::Leaf(mean));

        let first = self.data.target(idx[0]);
        let constant = idx.iter().all(|&i| self.data.target(i) == first);
        if n < 2 * self.params.min_leaf || constant {
            return at;
        }
        let Some(best) = self.best_split(idx, mean) else {
            return at;
        };

        let feature = best.feature;
        let threshold = best.threshold;
        let mut split = 0;
        for k in 0..n {
            if self.data.row(idx[k])[feature] <= threshold {
                idx.swap(split, k);
                split += 1;
            }
        }
        let (l, r) = idx.split_at_mut(split);
        let left = self.build(l);
        let right = self.build(r);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    fn best_split(&mut self, idx: &[usize], mean: f64) -> Option<Candidate> {
        let p = self.data.n_features();
        let n = idx.len();
        let min_leaf = self.params.min_leaf;
        let features = index::sample(&mut self.rng, p, self.params.mtry);

        // Scores are sum_l^2 / n_l + sum_r^2 / n_r on mean-centred targets;
        // maximising it minimises the children's squared error.
        let mut best: Option<Candidate> = None;
        let parent_ss: f64 = idx.iter().map(|&i| (self.data.target(i) - mean).powi(2)).sum();
        for feature in features.iter() {
            self.order.clear();
            self.order
                .extend(idx.iter().map(|&i| (self.data.row(i)[feature], self.data.target(i) - mean)));
            self.order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let total: f64 = self.order.iter().map(|o| o.1).sum();
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.order[k].1;
                let n_left = k + 1;
                if n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let (a, b) = (self.order[k].0, self.order[k + 1].0);
                if a == b {
                    continue;
                }
                let right_sum = total - left_sum;
                let score = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64;
                if best.as_ref().is_none_or(|c| score > c.score) {
                    let mut threshold = 0.5 * (a + b);
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(Candidate {
                        feature,
                        threshold,
                        score,
                    });
                }
            }
        }
        // A split must remove a non-negligible part of the squared error.
        best.filter(|c| c.score - total_sq(idx, self.data, mean) / n as f64 > 1e-12 * parent_ss)
    }
}

fn total_sq(idx: &[usize], data: &Dataset, mean: f64) -> f64 {
    let s: f64 = idx.iter().map(|&i| data.target(i) - mean).sum();
    s * s
}

/// Draws a bootstrap sample of `n` row indices.
pub(crate) fn bootstrap_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}
