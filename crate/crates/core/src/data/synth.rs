//! Synthetic regression problems.
//!
//! Features are drawn uniformly from `[-1, 1]^p`; the target is a fixed
//! function of the features plus Gaussian noise of standard deviation
//! `noise`. The `heterogeneous` problem sums three components that favour
//! different learners: a global linear trend, a handful of narrow bumps and a
//! smooth wave.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Linear,
    Piecewise,
    SineMix,
    Heterogeneous,
}

impl Generator {
    pub const ALL: [Generator; 4] = [
        Generator::Linear,
        Generator::Piecewise,
        Generator::SineMix,
        Generator::Heterogeneous,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Generator::Linear => "linear",
            Generator::Piecewise => "piecewise",
            Generator::SineMix => "sine-mix",
            Generator::Heterogeneous => "heterogeneous",
        }
    }

    pub fn default_features(self) -> usize {
        match self {
            Generator::Linear => 4,
            Generator::Piecewise => 3,
            Generator::SineMix => 3,
            Generator::Heterogeneous => 6,
        }
    }

    pub fn min_features(self) -> usize {
        match self {
            Generator::Linear | Generator::Piecewise => 1,
            Generator::SineMix => 2,
            Generator::Heterogeneous => 5,
        }
    }

    /// Noise-free target.
    pub fn response(self, x: &[f64]) -> f64 {
        use std::f64::consts::PI;
        match self {
            Generator::Linear => linear_part(x),
            Generator::Piecewise => {
                let mut y = if x[0] > 0.0 { 3.0 } else { -1.0 };
                if x.len() > 1 && x[1] > 0.5 {
                    y += 2.0;
                }
                if x.len() > 2 && x[2] < -0.25 {
                    y -= 1.5;
                }
                y
            }
            Generator::SineMix => {
                (PI * x[0]).sin() + 0.5 * (2.0 * PI * x[1]).sin() + (PI * x[0] * x[1]).cos()
            }
            Generator::Heterogeneous => {
                let linear = 2.0 * x[0] - 1.5 * x[1] + x[2];
                let local: f64 = BUMPS
                    .iter()
                    .map(|&(cx, cy, a)| {
                        let d2 = (x[3] - cx).powi(2) + (x[4] - cy).powi(2);
                        a * (-d2 / (2.0 * BUMP_WIDTH * BUMP_WIDTH)).exp()
                    })
                    .sum();
                let smooth = 1.5 * (PI * x[0] * x[2]).sin() + (PI * x[1]).cos();
                linear + local + smooth
            }
        }
    }
}

const BUMP_WIDTH: f64 = 0.18;
const BUMPS: [(f64, f64, f64); 6] = [
    (-0.6, -0.5, 2.5),
    (0.5, 0.55, -2.0),
    (0.1, -0.2, 3.0),
    (-0.45, 0.6, -2.5),
    (0.7, -0.6, 2.0),
    (-0.1, 0.3, -1.5),
];

fn linear_part(x: &[f64]) -> f64 {
    1.0 + x
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let c = 1.0 + 0.5 * j as f64;
            if j % 2 == 0 {
                c * v
            } else {
                -c * v
            }
        })
        .sum::<f64>()
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.id() == s)
            .ok_or_else(|| Error::UnknownGenerator(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub generator: Generator,
    pub noise: f64,
    pub size: usize,
    /// Feature count; defaults to the generator's own.
    pub features: Option<usize>,
}

impl SynthSpec {
    pub fn new(generator: Generator, noise: f64, size: usize) -> Self {
        SynthSpec {
            generator,
            noise,
            size,
            features: None,
        }
    }
}

pub fn synth_generate<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Result<Dataset> {
    if spec.size == 0 {
        return Err(Error::param("synthetic dataset size must be at least 1"));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(Error::param(format!("noise must be finite and non-negative, got {}", spec.noise)));
    }
    let g = spec.generator;
    let p = spec.features.unwrap_or_else(|| g.default_features());
    if p < g.min_features() {
        return Err(Error::param(format!("generator {g} needs at least {} features", g.min_features())));
    }
    let mut features = Vec::with_capacity(spec.size * p);
    let mut targets = Vec::with_capacity(spec.size);
    for _ in 0..spec.size {
        let start = features.len();
        features.extend((0..p).map(|_| rng.random_range(-1.0..=1.0)));
        let eps: f64 = StandardNormal.sample(rng);
        targets.push(g.response(&features[start..]) + spec.noise * eps);
    }
    Dataset::new(g.id(), features, targets, p)
}

/// Convenience wrapper seeding the generator from a `u64`.
pub fn synth_seeded(spec: &SynthSpec, seed_value: u64) -> Result<Dataset> {
    synth_generate(spec, &mut seed::rng(seed::derive(seed_value, "synth", 0)))
}
