//! Model files: JSON metadata plus a little-endian `f64` coefficient block.

use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::dataset::Preprocessor;
use super::features::FeatureSpec;
use super::{ModelConfig, ModelError, TrainedModel};

pub const MODEL_FILE_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"EMSTKCF1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub config: ModelConfig,
    pub spec: FeatureSpec,
    pub preprocessor: Preprocessor,
    /// First and last training dates.
    pub trained_on: (NaiveDate, NaiveDate),
    pub seed: u64,
    pub model: TrainedModel,
}

impl ModelFile {
    /// All numeric parameters in a fixed order.
    fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.model {
            TrainedModel::Svm(m) => {
                for b in &m.binaries {
                    for sv in &b.support_vectors {
                        out.extend_from_slice(sv);
                    }
                    out.extend_from_slice(&b.coef);
                    out.push(b.rho);
                }
            }
            TrainedModel::LogReg(m) => out.extend_from_slice(&m.weights),
        }
        out
    }

    fn expected_len(&self) -> usize {
        match &self.model {
            TrainedModel::Svm(m) => m.binaries.iter().map(|b| b.n_support * (m.n_features + 1) + 1).sum(),
            TrainedModel::LogReg(m) => m.classes.len() * (m.n_features + 1),
        }
    }

    fn restore(&mut self, mut values: &[f64]) {
        let mut take = |n: usize| {
            let (head, tail) = values.split_at(n);
            values = tail;
            head.to_vec()
        };
        match &mut self.model {
            TrainedModel::Svm(m) => {
                let d = m.n_features;
                for b in &mut m.binaries {
                    b.support_vectors = (0..b.n_support).map(|_| take(d)).collect();
                    b.coef = take(b.n_support);
                    b.rho = take(1)[0];
                }
            }
            TrainedModel::LogReg(m) => m.weights = take(m.classes.len() * (m.n_features + 1)),
        }
    }
}

pub fn save_model<J: Write, B: Write>(file: &ModelFile, json: J, mut bin: B) -> Result<(), ModelError> {
    serde_json::to_writer_pretty(json, file).map_err(|e| ModelError::Format(e.to_string()))?;
    let coef = file.coefficients();
    bin.write_all(MAGIC)?;
    bin.write_all(&(coef.len() as u64).to_le_bytes())?;
    for v in coef {
        bin.write_all(&v.to_le_bytes())?;
    }
    bin.flush()?;
    Ok(())
}

pub fn load_model<J: Read, B: Read>(json: J, mut bin: B) -> Result<ModelFile, ModelError> {
    let mut file: ModelFile = serde_json::from_reader(json).map_err(|e| ModelError::Format(e.to_string()))?;
    if file.format_version != MODEL_FILE_VERSION {
        return Err(ModelError::Format(format!(
            "format version {} (expected {MODEL_FILE_VERSION})",
            file.format_version
        )));
    }
    let mut bytes = Vec::new();
    bin.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(ModelError::Format("coefficient block has a bad header".into()));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = &bytes[16..];
    if count != file.expected_len() || body.len() != count * 8 {
        return Err(ModelError::Format(format!(
            "coefficient block holds {} values, metadata expects {}",
            body.len() / 8,
            file.expected_len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    file.restore(&values);
    Ok(file)
}
