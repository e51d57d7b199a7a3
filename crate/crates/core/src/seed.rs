//! Seed derivation.
//!
//! Every random decision in the crate flows from a single `u64` master seed.
//! Sub-seeds are derived from `(parent, label, index)` triples with a
//! SplitMix64 finaliser, so a sub-stream depends only on *what* it is used for
//! and never on which worker thread happened to run it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type StdRng = ChaCha8Rng;

/// Default master seed when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 20150801;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes.
fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a child seed for `(label, index)` under `parent`.
pub fn derive(parent: u64, label: &str, index: u64) -> u64 {
    mix(mix(parent ^ label_hash(label)).wrapping_add(mix(index)))
}

/// Derives a child seed from a path of indices.
pub fn derive_path(parent: u64, label: &str, path: &[u64]) -> u64 {
    path.iter()
        .fold(derive(parent, label, path.len() as u64), |acc, &i| {
            derive(acc, label, i)
        })
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Streaming 64-bit hasher for fingerprints (datasets, specs). Stable across
/// platforms and releases, unlike `std::hash::DefaultHasher`.
#[derive(Debug, Clone)]
pub struct Fingerprint(u64);

impl Default for Fingerprint {
    fn default() -> Self {
        Fingerprint(0x243f_6a88_85a3_08d3)
    }
}

impl Fingerprint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.0 = mix(self.0 ^ v);
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.u64(v.to_bits())
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.u64(label_hash(s)).u64(s.len() as u64)
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}
