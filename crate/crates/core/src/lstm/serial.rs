//! Bit-exact JSON model serialization.
//!
//! Every f64 is stored twice: a 16-digit hex encoding of its bits, which
//! is authoritative, and a decimal rendering for human inspection. Loads
//! reconstruct from the hex, so a save/load round trip is exact.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::NormMeta;

use super::{EpochStats, LstmParams, TrainConfig, TrainedModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorJson {
    shape: Vec<usize>,
    hex: Vec<String>,
    dec: Vec<f64>,
}

impl TensorJson {
    fn from_values(shape: Vec<usize>, values: &[f64]) -> Self {
        TensorJson {
            shape,
            hex: values.iter().map(|v| format!("{:016x}", v.to_bits())).collect(),
            dec: values.to_vec(),
        }
    }

    fn decode(&self, name: &str, expected_shape: &[usize]) -> Result<Vec<f64>> {
        if self.shape != expected_shape {
            return Err(Error::ModelFormat(format!(
                "tensor {name}: shape {:?} does not match expected {:?}",
                self.shape, expected_shape
            )));
        }
        let len: usize = expected_shape.iter().product();
        if self.hex.len() != len {
            return Err(Error::ModelFormat(format!(
                "tensor {name}: {} hex values for shape {:?}",
                self.hex.len(),
                self.shape
            )));
        }
        self.hex
            .iter()
            .map(|h| {
                if h.len() != 16 {
                    return Err(Error::ModelFormat(format!(
                        "tensor {name}: hex value '{h}' is not 16 digits"
                    )));
                }
                u64::from_str_radix(h, 16)
                    .map(f64::from_bits)
                    .map_err(|_| {
                        Error::ModelFormat(format!("tensor {name}: invalid hex value '{h}'"))
                    })
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    version: u32,
    input_dim: usize,
    hidden_dim: usize,
    config: TrainConfig,
    weights: BTreeMap<String, TensorJson>,
    norm_mean: TensorJson,
    norm_std: TensorJson,
    history: Vec<EpochStats>,
}

/// Renders a trained model as pretty-printed JSON.
pub fn serialize_model(model: &TrainedModel) -> Result<String> {
    let params = &model.params;
    let mut weights = BTreeMap::new();
    for (name, values) in params.tensors() {
        let shape = LstmParams::tensor_shape(name, params.input_dim, params.hidden_dim);
        weights.insert(name.to_string(), TensorJson::from_values(shape, values));
    }
    let means: Vec<f64> = model.norm_meta.iter().map(|m| m.mean).collect();
    let stds: Vec<f64> = model.norm_meta.iter().map(|m| m.std).collect();
    let doc = ModelJson {
        version: MODEL_FORMAT_VERSION,
        input_dim: params.input_dim,
        hidden_dim: params.hidden_dim,
        config: model.config,
        weights,
        norm_mean: TensorJson::from_values(alloc::vec![means.len()], &means),
        norm_std: TensorJson::from_values(alloc::vec![stds.len()], &stds),
        history: model.history.clone(),
    };
    serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::ModelFormat(format!("encode failed: {e}")))
}

/// Parses model JSON back into a trained model, bit for bit.
pub fn deserialize_model(text: &str) -> Result<TrainedModel> {
    let doc: ModelJson = serde_json::from_str(text)
        .map_err(|e| Error::ModelFormat(format!("parse failed: {e}")))?;
    if doc.version != MODEL_FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
            doc.version
        )));
    }
    doc.config.validate()?;
    if doc.config.hidden_dim != doc.hidden_dim {
        return Err(Error::ModelFormat(format!(
            "hidden_dim {} disagrees with config value {}",
            doc.hidden_dim, doc.config.hidden_dim
        )));
    }
    let mut params = LstmParams::zeros(doc.input_dim, doc.hidden_dim);
    for (name, slot) in params.tensors_mut() {
        let tensor = doc.weights.get(name).ok_or_else(|| {
            Error::ModelFormat(format!("missing tensor {name} in weights"))
        })?;
        let shape = LstmParams::tensor_shape(name, doc.input_dim, doc.hidden_dim);
        let values = tensor.decode(name, &shape)?;
        slot.copy_from_slice(&values);
    }
    if doc.weights.len() != params.tensors().len() {
        return Err(Error::ModelFormat(format!(
            "unexpected extra tensors: {} stored, {} needed",
            doc.weights.len(),
            params.tensors().len()
        )));
    }
    let n = doc.norm_mean.shape.first().copied().unwrap_or(0);
    let means = doc.norm_mean.decode("norm_mean", &[n])?;
    let stds = doc.norm_std.decode("norm_std", &[n])?;
    if means.len() != stds.len() {
        return Err(Error::LengthMismatch { left: means.len(), right: stds.len() });
    }
    let norm_meta: Vec<NormMeta> = means
        .iter()
        .zip(&stds)
        .map(|(&mean, &std)| NormMeta { mean, std })
        .collect();
    for meta in &norm_meta {
        if !meta.std.is_finite() || meta.std <= 0.0 {
            return Err(Error::ModelFormat(format!(
                "normalization std {} is not a positive finite value",
                meta.std
            )));
        }
        if !meta.mean.is_finite() {
            return Err(Error::ModelFormat("normalization mean is not finite".into()));
        }
    }
    params.validate_finite()?;
    Ok(TrainedModel { params, config: doc.config, history: doc.history, norm_meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedRng;

    fn sample_model() -> TrainedModel {
        let mut rng = SeedRng::new(4242);
        let mut params = LstmParams::seeded_init(3, 4, &mut rng);
        // Awkward values that decimal text would mangle without care.
        params.b_out = 0.1 + 0.2;
        params.w_out[0] = f64::MIN_POSITIVE;
        params.b_g[1] = -1.0e-300;
        TrainedModel {
            params,
            config: TrainConfig { lag: 7, hidden_dim: 4, epochs: 2, ..TrainConfig::default() },
            history: alloc::vec![
                EpochStats { epoch: 0, train_mape: 0.5, test_mape: 0.6 },
                EpochStats { epoch: 1, train_mape: 0.4, test_mape: 0.55 },
            ],
            norm_meta: alloc::vec![
                NormMeta { mean: 0.012, std: 0.003 },
                NormMeta { mean: -0.4, std: 1.0 + 1e-15 },
            ],
        }
    }

    #[test]
    fn round_trip_is_bitwise_exact() {
        let model = sample_model();
        let text = serialize_model(&model).unwrap();
        let back = deserialize_model(&text).unwrap();
        assert_eq!(back.params, model.params);
        assert_eq!(back.config, model.config);
        assert_eq!(back.history, model.history);
        assert_eq!(back.norm_meta.len(), model.norm_meta.len());
        for (a, b) in back.norm_meta.iter().zip(&model.norm_meta) {
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.std.to_bits(), b.std.to_bits());
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        let model = sample_model();
        assert_eq!(serialize_model(&model).unwrap(), serialize_model(&model).unwrap());
    }

    #[test]
    fn rejects_wrong_version() {
        let model = sample_model();
        let text = serialize_model(&model).unwrap();
        let bumped = text.replacen("\"version\": 1", "\"version\": 2", 1);
        let err = deserialize_model(&bumped).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)));
        assert!(format!("{err}").contains("version"));
    }

    #[test]
    fn rejects_missing_tensor() {
        let model = sample_model();
        let text = serialize_model(&model).unwrap();
        let broken = text.replacen("\"w_f\"", "\"w_x\"", 1);
        let err = deserialize_model(&broken).unwrap_err();
        assert!(format!("{err}").contains("w_f"));
    }

    #[test]
    fn rejects_corrupted_hex() {
        let model = sample_model();
        let text = serialize_model(&model).unwrap();
        // Damage the first hex literal wherever it sits.
        let idx = text.find("\"hex\": [").unwrap();
        let start = text[idx..].find('"').unwrap() + idx;
        let quote = text[start + 1..].find('"').unwrap() + start + 1;
        let vstart = text[quote + 1..].find('"').unwrap() + quote + 1;
        let mut broken = String::new();
        broken.push_str(&text[..vstart + 1]);
        broken.push_str("zz");
        broken.push_str(&text[vstart + 3..]);
        let err = deserialize_model(&broken).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)));
    }

    #[test]
    fn rejects_nonpositive_norm_std() {
        let model = sample_model();
        let text = serialize_model(&model).unwrap();
        // 0.003 encodes to this bit pattern; replace with the bits of 0.
        let zero_hex = format!("{:016x}", 0.0f64.to_bits());
        let bad_hex = format!("{:016x}", 0.003f64.to_bits());
        let broken = text.replacen(&bad_hex, &zero_hex, 1);
        assert!(broken != text, "expected the std hex literal to appear");
        let err = deserialize_model(&broken).unwrap_err();
        assert!(format!("{err}").contains("positive"));
    }
}
