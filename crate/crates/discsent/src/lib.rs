//! Filesystem, file-format, and CLI layer over `discsent-core`:
//! corpus walking, JSONL dataset extraction, the training driver with
//! metrics logging and checkpoints, and the evaluation commands.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod extract;
pub mod indexfile;
pub mod records;
pub mod training;

pub use error::{CliError, Result};
