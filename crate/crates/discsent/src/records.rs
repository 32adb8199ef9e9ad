//! JSON Lines dataset files: one task record per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use discsent_core::discourse::Record;

use crate::error::{CliError, Result};

pub fn record_to_line(record: &Record) -> String {
    serde_json::to_string(record).expect("records serialize")
}

/// Reads a whole JSONL file; parse failures abort with the line number.
pub fn read_records(path: &Path) -> Result<Vec<Record>> {
    let file = File::open(path)
        .map_err(|e| CliError::data(format!("opening '{}'", path.display()), e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::data(format!("reading '{}'", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| {
            CliError::Data(format!("{}:{}: {e}", path.display(), idx + 1))
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Line-buffered writer for one output JSONL file.
pub struct JsonlWriter {
    writer: BufWriter<File>,
    path: String,
    pub lines: u64,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path)
            .map_err(|e| CliError::data(format!("creating '{}'", path.display()), e))?;
        Ok(JsonlWriter {
            writer: BufWriter::new(file),
            path: path.display().to_string(),
            lines: 0,
        })
    }

    pub fn write_line(&mut self, line: &str) -> Result<()> {
        self.writer
            .write_all(line.as_bytes())
            .and_then(|_| self.writer.write_all(b"\n"))
            .map_err(|e| CliError::data(format!("writing '{}'", self.path), e))?;
        self.lines += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<u64> {
        self.writer
            .flush()
            .map_err(|e| CliError::data(format!("flushing '{}'", self.path), e))?;
        Ok(self.lines)
    }
}
