use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::data::Dataset;
use crate::error::Result;
use crate::learners::{LearnerSpec, Model};

type Key = (u64, u64, u64);

/// Memo of trained models keyed by `(data fingerprint, spec fingerprint,
/// seed)`.
///
/// Training is a pure function of those three inputs, so a hit returns
/// exactly the model a fresh training run would have produced. The genetic
/// algorithm shares one cache across a run: genomes that recombine the same
/// members under the same fold split reuse each other's level-1 fits.
#[derive(Debug, Default)]
pub struct ModelCache {
    models: Mutex<HashMap<Key, Arc<Model>>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl ModelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_train(&self, spec: &LearnerSpec, data: &Dataset, seed: u64) -> Result<Arc<Model>> {
        let key = (data.fingerprint(), spec.fingerprint(), seed);
        if let Some(m) = self.models.lock().expect("cache lock").get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(Arc::clone(m));
        }
        // Trained outside the lock; a concurrent duplicate computes the
        // same model, so whichever insert lands first is kept.
        let model = Arc::new(spec.train_with(data, seed, Some(self))?);
        self.misses.fetch_add(1, Ordering::Relaxed);
        let mut map = self.models.lock().expect("cache lock");
        Ok(Arc::clone(map.entry(key).or_insert(model)))
    }

    pub fn len(&self) -> usize {
        self.models.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn clear(&self) {
        self.models.lock().expect("cache lock").clear();
    }
}

/// Trains through the cache when one is given.
pub(crate) fn train_maybe_cached(
    spec: &LearnerSpec,
    data: &Dataset,
    seed: u64,
    cache: Option<&ModelCache>,
) -> Result<Arc<Model>> {
    match cache {
        Some(c) => c.get_or_train(spec, data, seed),
        None => spec.train_with(data, seed, None).map(Arc::new),
    }
}
