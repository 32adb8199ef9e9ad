//! Binary serialization for models and encoding indexes.
//!
//! Layout: magic `DSCSENT1`, u32 version, u64 header length, a JSON
//! header (kind, metadata, tensor directory with byte offsets), then a
//! payload of raw little-endian f32 values. Round-trips are bit-exact.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingTable;
use crate::model::{Model, ModelConfig};
use crate::tensor::{ShapeError, Tensor};
use crate::vocab::Vocabulary;

pub const MAGIC: &[u8; 8] = b"DSCSENT1";
pub const VERSION: u32 = 1;

const FIXED_HEADER_LEN: usize = 8 + 4 + 8;

#[derive(Clone, Debug, PartialEq)]
pub enum CheckpointError {
    Truncated,
    BadMagic,
    BadVersion(u32),
    Header(String),
    MissingTensor(String),
    UnexpectedTensor(String),
    Shape(ShapeError),
}

impl From<ShapeError> for CheckpointError {
    fn from(e: ShapeError) -> Self {
        CheckpointError::Shape(e)
    }
}

impl core::fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CheckpointError::Truncated => write!(f, "checkpoint is truncated"),
            CheckpointError::BadMagic => write!(f, "not a checkpoint file (bad magic)"),
            CheckpointError::BadVersion(v) => write!(f, "unsupported checkpoint version {v}"),
            CheckpointError::Header(msg) => write!(f, "malformed checkpoint header: {msg}"),
            CheckpointError::MissingTensor(name) => write!(f, "missing tensor '{name}'"),
            CheckpointError::UnexpectedTensor(name) => write!(f, "unexpected tensor '{name}'"),
            CheckpointError::Shape(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for CheckpointError {}

#[derive(Serialize, Deserialize)]
struct BlockHeader {
    kind: String,
    meta: serde_json::Value,
    tensors: Vec<TensorDirEntry>,
}

#[derive(Serialize, Deserialize)]
struct TensorDirEntry {
    name: String,
    shape: Vec<usize>,
    /// Byte offset into the payload.
    offset: u64,
    /// Element count.
    len: u64,
}

/// A named tensor recovered from a block.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

/// Encodes named tensors plus arbitrary JSON metadata into the
/// container format.
pub fn encode_tensor_block(
    kind: &str,
    meta: serde_json::Value,
    tensors: &[(String, Vec<usize>, &[f32])],
) -> Vec<u8> {
    let mut directory = Vec::with_capacity(tensors.len());
    let mut offset = 0u64;
    for (name, shape, data) in tensors {
        directory.push(TensorDirEntry {
            name: name.clone(),
            shape: shape.clone(),
            offset,
            len: data.len() as u64,
        });
        offset += 4 * data.len() as u64;
    }
    let header = BlockHeader {
        kind: kind.to_string(),
        meta,
        tensors: directory,
    };
    let header_bytes = serde_json::to_vec(&header).expect("header serializes");

    let mut out = Vec::with_capacity(FIXED_HEADER_LEN + header_bytes.len() + offset as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    out.extend_from_slice(&header_bytes);
    for (_, _, data) in tensors {
        for v in *data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Decodes a container produced by [`encode_tensor_block`], verifying
/// magic, version, and every directory entry against the payload.
pub fn decode_tensor_block(
    bytes: &[u8],
) -> Result<(String, serde_json::Value, Vec<TensorEntry>), CheckpointError> {
    if bytes.len() < FIXED_HEADER_LEN {
        return Err(CheckpointError::Truncated);
    }
    if &bytes[..8] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let header_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let payload_start = FIXED_HEADER_LEN
        .checked_add(header_len)
        .ok_or(CheckpointError::Truncated)?;
    if bytes.len() < payload_start {
        return Err(CheckpointError::Truncated);
    }
    let header: BlockHeader = serde_json::from_slice(&bytes[FIXED_HEADER_LEN..payload_start])
        .map_err(|e| CheckpointError::Header(e.to_string()))?;
    let payload = &bytes[payload_start..];

    let mut tensors = Vec::with_capacity(header.tensors.len());
    for entry in header.tensors {
        let elements = entry.len as usize;
        if entry.shape.iter().product::<usize>() != elements {
            return Err(CheckpointError::Header(alloc::format!(
                "tensor '{}' directory shape does not match its length",
                entry.name
            )));
        }
        let start = entry.offset as usize;
        let end = start
            .checked_add(4 * elements)
            .ok_or(CheckpointError::Truncated)?;
        if payload.len() < end {
            return Err(CheckpointError::Truncated);
        }
        let data: Vec<f32> = payload[start..end]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        tensors.push(TensorEntry {
            name: entry.name,
            shape: entry.shape,
            data,
        });
    }
    Ok((header.kind, header.meta, tensors))
}

#[derive(Serialize, Deserialize)]
struct ModelMeta {
    config: ModelConfig,
    vocab_tokens: Vec<String>,
    vocab_counts: Vec<u64>,
}

const FROZEN_EMBEDDING: &str = "embedding.frozen";

/// Serializes a model: config, vocabulary, and every parameter value
/// (plus the frozen embedding matrix when present).
pub fn encode_checkpoint(model: &Model<f32>) -> Vec<u8> {
    let meta = ModelMeta {
        config: model.config(),
        vocab_tokens: model.vocab.tokens().to_vec(),
        vocab_counts: model.vocab.counts().to_vec(),
    };
    let meta = serde_json::to_value(&meta).expect("meta serializes");

    let mut tensors: Vec<(String, Vec<usize>, &[f32])> = Vec::new();
    if let crate::encoder::EmbeddingSlot::Frozen(matrix) = &model.encoder.embedding {
        tensors.push((
            FROZEN_EMBEDDING.to_string(),
            matrix.shape().to_vec(),
            matrix.data(),
        ));
    }
    for id in model.store.ids() {
        let value = model.store.value(id);
        tensors.push((
            model.store.name(id).to_string(),
            value.shape().to_vec(),
            value.data(),
        ));
    }
    encode_tensor_block("model", meta, &tensors)
}

/// Rebuilds a model from checkpoint bytes, verifying the tensor set
/// and every shape.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<Model<f32>, CheckpointError> {
    let (kind, meta, tensors) = decode_tensor_block(bytes)?;
    if kind != "model" {
        return Err(CheckpointError::Header(alloc::format!(
            "expected a model block, found '{kind}'"
        )));
    }
    let meta: ModelMeta =
        serde_json::from_value(meta).map_err(|e| CheckpointError::Header(e.to_string()))?;
    let vocab = Vocabulary::from_id_order(meta.vocab_tokens, meta.vocab_counts)
        .map_err(|e| CheckpointError::Header(e.to_string()))?;
    if vocab.len() != meta.config.vocab_size {
        return Err(CheckpointError::Header(alloc::format!(
            "vocabulary has {} entries but config says {}",
            vocab.len(),
            meta.config.vocab_size
        )));
    }

    let embedding_name = if meta.config.trainable_embeddings {
        "embedding"
    } else {
        FROZEN_EMBEDDING
    };
    let emb_entry = tensors
        .iter()
        .find(|t| t.name == embedding_name)
        .ok_or_else(|| CheckpointError::MissingTensor(embedding_name.to_string()))?;
    let matrix = Tensor::from_vec(&emb_entry.shape, emb_entry.data.clone())?;
    let table = EmbeddingTable {
        matrix,
        trainable: meta.config.trainable_embeddings,
    };

    // Model::new rejects an embedding matrix whose shape disagrees with
    // the vocabulary size or configured dimension.
    let mut model = Model::new(meta.config.encoder, vocab, Some(table), 0)?;

    let mut filled = 0usize;
    for entry in &tensors {
        if entry.name == FROZEN_EMBEDDING {
            continue;
        }
        let id = model
            .store
            .id_of(&entry.name)
            .ok_or_else(|| CheckpointError::UnexpectedTensor(entry.name.clone()))?;
        let value = &mut model.store.param_mut(id).value;
        if value.shape() != entry.shape.as_slice() {
            return Err(CheckpointError::Shape(ShapeError {
                op: "checkpoint_load",
                lhs: value.shape().to_vec(),
                rhs: entry.shape.clone(),
            }));
        }
        value.data_mut().copy_from_slice(&entry.data);
        filled += 1;
    }
    if filled != model.store.len() {
        return Err(CheckpointError::MissingTensor(alloc::format!(
            "{} of {} parameters present",
            filled,
            model.store.len()
        )));
    }
    Ok(model)
}
