//! Model file format: JSON header plus a flat little-endian f32 weight
//! payload with a SHA-256 checksum.
//!
//! Layout: 8-byte magic `SGNET1\0\0`, u32 LE header length, header JSON,
//! payload. The header records the architecture, the role of the model, the
//! normalizer it was trained against, the training seed, and the payload
//! checksum. Weights are stored layer by layer (row-major), then biases,
//! then the class-embedding table.

use super::{FeedforwardNet, NetConfig, NeuralError};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"SGNET1\0\0";

/// Header metadata stored alongside the architecture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMeta {
    /// What the model is for, e.g. `denoiser`, `classifier`, `regressor:cw_star`.
    pub role: String,
    /// SHA-256 of the normalizer file this model expects, if any.
    pub normalizer_sha256: Option<String>,
    pub training_seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    config: NetConfig,
    meta: ModelMeta,
    payload_sha256: String,
    payload_len: usize,
}

fn flatten(net: &FeedforwardNet) -> Vec<f32> {
    let mut out = Vec::with_capacity(net.num_params());
    for w in &net.weights {
        out.extend(w.iter().map(|&v| v as f32));
    }
    for b in &net.biases {
        out.extend(b.iter().map(|&v| v as f32));
    }
    if let Some(t) = &net.class_table {
        out.extend(t.iter().map(|&v| v as f32));
    }
    out
}

fn payload_bytes(values: &[f32]) -> Vec<u8> {
    let mut bytes = Vec::with_capacity(values.len() * 4);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

/// Write the model to `path`.
pub fn save_model(net: &FeedforwardNet, meta: &ModelMeta, path: &Path) -> Result<(), NeuralError> {
    let payload = payload_bytes(&flatten(net));
    let header = Header {
        config: net.config.clone(),
        meta: meta.clone(),
        payload_sha256: hex::encode(Sha256::digest(&payload)),
        payload_len: payload.len(),
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| NeuralError::Corrupt(e.to_string()))?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(MAGIC)?;
    file.write_all(&(header_json.len() as u32).to_le_bytes())?;
    file.write_all(&header_json)?;
    file.write_all(&payload)?;
    Ok(())
}

/// Load a model, verifying the payload checksum.
pub fn load_model(path: &Path) -> Result<(FeedforwardNet, ModelMeta), NeuralError> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NeuralError::Corrupt("bad magic".to_string()));
    }
    let mut len_bytes = [0u8; 4];
    file.read_exact(&mut len_bytes)?;
    let header_len = u32::from_le_bytes(len_bytes) as usize;
    let mut header_json = vec![0u8; header_len];
    file.read_exact(&mut header_json)?;
    let header: Header =
        serde_json::from_slice(&header_json).map_err(|e| NeuralError::Corrupt(e.to_string()))?;
    let mut payload = Vec::new();
    file.read_to_end(&mut payload)?;
    if payload.len() != header.payload_len {
        return Err(NeuralError::Corrupt(format!(
            "payload length {} != {}",
            payload.len(),
            header.payload_len
        )));
    }
    if hex::encode(Sha256::digest(&payload)) != header.payload_sha256 {
        return Err(NeuralError::ChecksumMismatch);
    }
    let values: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4")) as f64)
        .collect();

    let cfg = header.config;
    let mut dims = vec![cfg.full_input_dim()];
    dims.extend_from_slice(&cfg.hidden);
    dims.push(cfg.output_dim);
    let mut cursor = 0usize;
    let mut take = |n: usize| -> Result<&[f64], NeuralError> {
        if cursor + n > values.len() {
            return Err(NeuralError::Corrupt("payload too short".to_string()));
        }
        let s = &values[cursor..cursor + n];
        cursor += n;
        Ok(s)
    };
    let mut weights = Vec::new();
    for l in 0..dims.len() - 1 {
        let (rows, cols) = (dims[l + 1], dims[l]);
        let w = Array2::from_shape_vec((rows, cols), take(rows * cols)?.to_vec())
            .expect("shape matches");
        weights.push(w);
    }
    let mut biases = Vec::new();
    for l in 0..dims.len() - 1 {
        biases.push(Array1::from_vec(take(dims[l + 1])?.to_vec()));
    }
    let class_table = match cfg.class_embed {
        Some(ce) => Some(
            Array2::from_shape_vec(
                (ce.num_classes, ce.dim),
                take(ce.num_classes * ce.dim)?.to_vec(),
            )
            .expect("shape matches"),
        ),
        None => None,
    };
    if cursor != values.len() {
        return Err(NeuralError::Corrupt("trailing payload bytes".to_string()));
    }
    Ok((
        FeedforwardNet {
            config: cfg,
            weights,
            biases,
            class_table,
        },
        header.meta,
    ))
}

/// SHA-256 of an arbitrary file, hex-encoded.
pub fn file_sha256(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
