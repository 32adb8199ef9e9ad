//! Corpus directory walking. Documents are identified by their path
//! relative to the corpus root (with `/` separators) and processed in
//! lexicographic doc-id order, which fixes the output order
//! independently of filesystem enumeration.

use std::path::{Path, PathBuf};

use discsent_core::text::RawDocument;
use walkdir::WalkDir;

use crate::error::{CliError, Result};

/// All regular files under `dir`, as (doc_id, absolute path), sorted
/// by doc_id bytes.
pub fn walk_corpus(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    if !dir.is_dir() {
        return Err(CliError::Data(format!(
            "corpus directory '{}' does not exist or is not a directory",
            dir.display()
        )));
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).follow_links(false) {
        let entry = entry.map_err(|e| CliError::data("walking corpus", e))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(dir)
            .expect("walkdir yields paths under its root");
        let doc_id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        files.push((doc_id, entry.path().to_path_buf()));
    }
    files.sort_by(|(a, _), (b, _)| a.cmp(b));
    Ok(files)
}

pub fn read_document(doc_id: &str, path: &Path) -> Result<RawDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("reading '{}'", path.display()), e))?;
    Ok(RawDocument::new(doc_id, text))
}
