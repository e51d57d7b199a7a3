//! Saved models: a magic line carrying the format version, then JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{LearnerSpec, Model};

pub const MAGIC: &str = "EVOSTACK-MODEL";
pub const FORMAT_VERSION: u32 = 1;

/// A trained model together with what produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SavedModel {
    pub spec: LearnerSpec,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub target: String,
    pub model: Model,
}

pub fn encode_model(saved: &SavedModel) -> String {
    let body = serde_json::to_string(saved).expect("models serialize");
    format!("{MAGIC} {FORMAT_VERSION}\n{body}\n")
}

pub fn decode_model(text: &str, path: &Path) -> Result<SavedModel> {
    let err = |message: String| Error::ModelFile { path: path.to_path_buf(), message };
    let (head, body) = text.split_once('\n').ok_or_else(|| err("missing header line".into()))?;
    let version = head
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| err("not a model file (bad magic)".into()))?;
    let version: u32 = version.parse().map_err(|_| err(format!("bad format version `{version}`")))?;
    if version != FORMAT_VERSION {
        return Err(err(format!("format version {version} is not supported (expected {FORMAT_VERSION})")));
    }
    serde_json::from_str(body).map_err(|e| err(e.to_string()))
}

pub fn save_model(saved: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_model(saved)).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    decode_model(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth::synth_seeded, Generator, SynthSpec};

    #[test]
    fn round_trip_and_version_check() {
        let data = synth_seeded(&SynthSpec { generator: Generator::Linear, noise: 0.1, size: 40, features: None }, 3).unwrap();
        let spec: LearnerSpec = "knn-k5-a2-euclidean".parse().unwrap();
        let model = spec.train(&data, 1).unwrap();
        let saved = SavedModel {
            spec,
            seed: 1,
            feature_names: data.feature_names().to_vec(),
            target: "y".into(),
            model,
        };
        let text = encode_model(&saved);
        assert!(text.starts_with("EVOSTACK-MODEL 1\n"));
        let back = decode_model(&text, Path::new("m")).unwrap();
        for row in data.rows() {
            assert_eq!(back.model.predict(row), saved.model.predict(row));
        }
        let wrong = text.replacen("EVOSTACK-MODEL 1", "EVOSTACK-MODEL 9", 1);
        assert!(matches!(decode_model(&wrong, Path::new("m")), Err(Error::ModelFile { .. })));
        assert!(decode_model("{}", Path::new("m")).is_err());
    }
}
