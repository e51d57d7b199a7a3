//! Datasets and everything that slices them: CSV ingestion, target scaling,
//! sub-sampling, fold assignment and synthetic generators.

mod csvio;
mod dataset;
mod folds;
mod scaler;
pub mod synth;

pub use csvio::{load_csv, load_features_csv, write_csv, write_features_csv};
pub use dataset::Dataset;
pub use folds::{assign_folds, subsample, FoldAssignment};
pub(crate) use folds::floor_tolerant;
pub use scaler::{fit_scaler, TargetScaler};
pub use synth::{synth_generate, Generator, SynthSpec};
