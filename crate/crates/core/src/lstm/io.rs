//! Versioned JSON model files. Floats are written in shortest round-trip
//! form and parsed with exact round-tripping, so save/load is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::network::LstmModel;
use super::params::Parameters;

pub const MODEL_FORMAT: &str = "loadband-lstm";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    input_size: usize,
    hidden_sizes: Vec<usize>,
    dropout_p: f64,
    seed: u64,
    norm_stats_id: Option<String>,
    params: Parameters,
}

pub fn model_to_json(m: &LstmModel) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        input_size: m.input_size(),
        hidden_sizes: m.hidden_sizes(),
        dropout_p: m.dropout_p,
        seed: m.seed,
        norm_stats_id: m.norm_stats_id.clone(),
        params: m.params.clone(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn model_from_json(text: &str) -> Result<LstmModel> {
    let corrupt = |detail: String| Error::Corrupt {
        kind: "model",
        detail,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
    if value.get("format").and_then(|f| f.as_str()) != Some(MODEL_FORMAT) {
        return Err(corrupt("missing or unknown format tag".into()));
    }
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| corrupt("missing version".into()))?;
    if version != u64::from(MODEL_VERSION) {
        return Err(Error::Version {
            kind: "model",
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: MODEL_VERSION,
        });
    }
    // Re-parse from text rather than from `value`: going through `Value`
    // would lose the exact float round-trip.
    let file: ModelFile = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
    let mut model = LstmModel::from_params(file.params, file.dropout_p, file.seed).map_err(|e| corrupt(e.to_string()))?;
    if model.input_size() != file.input_size || model.hidden_sizes() != file.hidden_sizes {
        return Err(corrupt("declared shapes disagree with parameters".into()));
    }
    model.norm_stats_id = file.norm_stats_id;
    Ok(model)
}

pub fn save_model(m: &LstmModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(m)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LstmModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::rng::Rng;
    use rand::{Rng as _, SeedableRng};

    #[test]
    fn round_trip_is_bit_exact() {
        let mut m = LstmModel::new(3, &[5, 4], 0.1, 99).unwrap();
        m.norm_stats_id = Some("abc123".into());
        m.params.head_bias = 0.1 + 0.2;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        for (a, b) in m.params.slices().iter().zip(back.params.slices()) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert_eq!(back, m);

        let mut r = Rng::seed_from_u64(5);
        for _ in 0..100 {
            let w = Matrix::from_fn(6, 3, |_, _| r.random_range(-2.0..2.0));
            let a = m.predict_window((&w).into(), None).unwrap();
            let b = back.predict_window((&w).into(), None).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let text = model_to_json(&LstmModel::new(2, &[3], 0.0, 1).unwrap()).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(model_from_json(cut), Err(Error::Corrupt { .. })));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let text = model_to_json(&LstmModel::new(2, &[3], 0.0, 1).unwrap()).unwrap();
        let bumped = text.replacen("\"version\":1", "\"version\":7", 1);
        assert!(matches!(model_from_json(&bumped), Err(Error::Version { found: 7, .. })));
    }

    #[test]
    fn inconsistent_shapes_are_corrupt() {
        let text = model_to_json(&LstmModel::new(2, &[3], 0.0, 1).unwrap()).unwrap();
        let lied = text.replacen("\"hidden_sizes\":[3]", "\"hidden_sizes\":[4]", 1);
        assert!(matches!(model_from_json(&lied), Err(Error::Corrupt { .. })));
    }
}
