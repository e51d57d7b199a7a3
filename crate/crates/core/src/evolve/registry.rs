use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::learners::{LearnerSpec, Metric};

/// Ordered list of candidate learners. Indices are 1-based and stable.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    entries: Vec<LearnerSpec>,
    names: Vec<String>,
}

impl Registry {
    pub fn new(entries: Vec<LearnerSpec>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::param("registry is empty"));
        }
        let names: Vec<String> = entries.iter().map(LearnerSpec::display_name).collect();
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n) {
                return Err(Error::param(format!("duplicate registry entry `{n}`")));
            }
        }
        for e in &entries {
            e.validate()?;
        }
        Ok(Registry { entries, names })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry at 1-based `index`.
    pub fn get(&self, index: usize) -> Option<&LearnerSpec> {
        index.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        index.checked_sub(1).and_then(|i| self.names.get(i)).map(String::as_str)
    }

    /// 1-based index of the entry named `name`.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name).map(|i| i + 1)
    }

    /// 1-based index of an entry equal to `spec`.
    pub fn position_of(&self, spec: &LearnerSpec) -> Option<usize> {
        self.entries.iter().position(|e| e == spec).map(|i| i + 1)
    }

    pub fn entries(&self) -> &[LearnerSpec] {
        &self.entries
    }

    /// `(index, name)` pairs in order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        self.names.iter().enumerate().map(|(i, n)| (i + 1, n.as_str()))
    }
}

/// Neural-net settings shared by the plain and bagged families, ascending
/// by iteration cap, then error threshold, then hidden size.
fn net_grid() -> Vec<LearnerSpec> {
    let mut out = Vec::new();
    for max_iter in [50, 100, 200, 500] {
        for epsilon in [0.001, 0.005] {
            for hidden in [10, 20] {
                out.push(LearnerSpec::net(hidden, max_iter, epsilon));
            }
        }
    }
    out
}

/// The 104 base-learner configurations: mean regression, PLS, k-NN, random
/// forests, neural nets and bagged neural nets, in that order.
pub fn build_default_registry() -> Registry {
    let mut entries = vec![LearnerSpec::Mean];
    entries.extend((2..=10).map(LearnerSpec::pls));
    for k in (10..=60).step_by(10) {
        for alpha in [10.0, 20.0] {
            for metric in [Metric::Manhattan, Metric::Euclidean] {
                entries.push(LearnerSpec::knn(k, alpha, metric));
            }
        }
    }
    entries.extend([5, 10, 25, 50, 100, 200].into_iter().map(LearnerSpec::forest));
    entries.extend(net_grid());
    for bags in [20, 40, 60] {
        entries.extend(net_grid().into_iter().map(|n| LearnerSpec::bagged(bags, n)));
    }
    Registry::new(entries).expect("default registry is valid")
}
