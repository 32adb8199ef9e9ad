//! Persisted sentence indexes: the checkpoint tensor container holding
//! the encoding matrix, plus a plain-text sidecar with one sentence per
//! line.

use std::path::{Path, PathBuf};

use discsent_core::checkpoint::{decode_tensor_block, encode_tensor_block};
use discsent_core::retrieval::SentenceIndex;

use crate::error::{CliError, Result};

pub const INDEX_EXT: &str = "idx";
const SIDECAR_SUFFIX: &str = "sents.txt";

/// `(prefix.idx, prefix.sents.txt)` for an output prefix.
pub fn index_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let base = prefix.to_string_lossy();
    (
        PathBuf::from(format!("{base}.{INDEX_EXT}")),
        PathBuf::from(format!("{base}.{SIDECAR_SUFFIX}")),
    )
}

fn sidecar_for(index_path: &Path) -> Result<PathBuf> {
    let s = index_path.to_string_lossy();
    let stem = s.strip_suffix(&format!(".{INDEX_EXT}")).ok_or_else(|| {
        CliError::Data(format!(
            "index path '{}' does not end in .{INDEX_EXT}",
            index_path.display()
        ))
    })?;
    Ok(PathBuf::from(format!("{stem}.{SIDECAR_SUFFIX}")))
}

pub fn write_index(index: &SentenceIndex<f32>, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let (index_path, sidecar_path) = index_paths(prefix);
    let meta = serde_json::json!({
        "dim": index.dim(),
        "rows": index.len(),
    });
    let bytes = encode_tensor_block(
        "index",
        meta,
        &[(
            "encodings".to_string(),
            vec![index.len(), index.dim()],
            index.encodings(),
        )],
    );
    std::fs::write(&index_path, bytes)
        .map_err(|e| CliError::data(format!("writing '{}'", index_path.display()), e))?;

    let mut sidecar = String::new();
    for sentence in index.sentences() {
        sidecar.push_str(&sentence.replace('\n', " "));
        sidecar.push('\n');
    }
    std::fs::write(&sidecar_path, sidecar)
        .map_err(|e| CliError::data(format!("writing '{}'", sidecar_path.display()), e))?;
    Ok((index_path, sidecar_path))
}

pub fn read_index(index_path: &Path) -> Result<SentenceIndex<f32>> {
    let bytes = std::fs::read(index_path)
        .map_err(|e| CliError::data(format!("reading '{}'", index_path.display()), e))?;
    let (kind, _meta, tensors) = decode_tensor_block(&bytes)
        .map_err(|e| CliError::data(format!("'{}'", index_path.display()), e))?;
    if kind != "index" {
        return Err(CliError::Data(format!(
            "'{}' is a {kind} file, not an index",
            index_path.display()
        )));
    }
    let encodings = tensors
        .into_iter()
        .find(|t| t.name == "encodings")
        .ok_or_else(|| {
            CliError::Data(format!(
                "'{}' is missing the encodings tensor",
                index_path.display()
            ))
        })?;
    if encodings.shape.len() != 2 {
        return Err(CliError::Data(format!(
            "'{}' encodings tensor is not rank 2",
            index_path.display()
        )));
    }
    let (rows, dim) = (encodings.shape[0], encodings.shape[1]);

    let sidecar_path = sidecar_for(index_path)?;
    let sidecar = std::fs::read_to_string(&sidecar_path)
        .map_err(|e| CliError::data(format!("reading '{}'", sidecar_path.display()), e))?;
    let sentences: Vec<String> = sidecar.lines().map(str::to_string).collect();
    if sentences.len() != rows {
        return Err(CliError::Data(format!(
            "'{}' holds {rows} encodings but '{}' holds {} sentences",
            index_path.display(),
            sidecar_path.display(),
            sentences.len()
        )));
    }
    SentenceIndex::from_parts(dim, encodings.data, sentences).ok_or_else(|| {
        CliError::Data(format!(
            "'{}' tensor shape is inconsistent",
            index_path.display()
        ))
    })
}
