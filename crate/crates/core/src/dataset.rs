//! Dataset ingestion.
//!
//! A dataset is a JSON-lines file, one record per line:
//!
//! ```json
//! {"id": "q1", "question": "…", "answer": "28", "dataset_kind": "math_word"}
//! ```
//!
//! The answer is encoded as a string and parsed under the record's
//! `dataset_kind`; it may be null or omitted when no gold answer exists.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::domain::{Answer, DatasetKind, DomainError, Question};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read dataset {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("dataset line {line}: {source}")]
    Malformed {
        line: usize,
        source: serde_json::Error,
    },
    #[error("dataset line {line} (id {id}): {source}")]
    BadRecord {
        line: usize,
        id: String,
        source: DomainError,
    },
    #[error("dataset line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("dataset contains no records")]
    Empty,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: String,
    question: String,
    #[serde(default)]
    answer: Option<String>,
    dataset_kind: DatasetKind,
}

/// Loads every record of a JSONL dataset file. Blank lines are skipped.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<Question>, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_dataset(BufReader::new(file))
}

/// Reads a JSONL dataset from any reader. Ids must be unique; results
/// and probing-set files are keyed by them.
pub fn read_dataset(reader: impl Read) -> Result<Vec<Question>, DatasetError> {
    let mut questions = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| DatasetError::Io {
            path: "<reader>".to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord =
            serde_json::from_str(&line).map_err(|source| DatasetError::Malformed {
                line: line_no,
                source,
            })?;
        if !seen_ids.insert(raw.id.clone()) {
            return Err(DatasetError::DuplicateId {
                line: line_no,
                id: raw.id,
            });
        }
        let gold =
            match &raw.answer {
                Some(text) => Some(Answer::parse_text(raw.dataset_kind, text).map_err(
                    |source| DatasetError::BadRecord {
                        line: line_no,
                        id: raw.id.clone(),
                        source,
                    },
                )?),
                None => None,
            };
        let question =
            Question::new(&raw.id, &raw.question, raw.dataset_kind, gold).map_err(|source| {
                DatasetError::BadRecord {
                    line: line_no,
                    id: raw.id.clone(),
                    source,
                }
            })?;
        questions.push(question);
    }
    if questions.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(questions)
}
