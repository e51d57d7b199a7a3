//! Regression ensembles: base learners, bagging, stacked generalisation and
//! a genetic algorithm that searches for good stacking ensembles.
//!
//! All randomness is derived from explicit `u64` seeds (see [`seed`]), so
//! every result is reproducible regardless of thread count.

pub mod data;
pub mod ensembles;
pub mod error;
pub mod eval;
pub mod evolve;
pub mod learners;
pub mod model_file;
pub mod seed;
pub mod specfile;

pub use data::Dataset;
pub use error::{Error, ErrorKind, Result};
pub use learners::{LearnerSpec, Model};
