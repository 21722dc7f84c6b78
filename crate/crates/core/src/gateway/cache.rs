//! Persistent response cache.
//!
//! An append-only JSONL file: one record per completed request, keyed by
//! the request digest. The whole file is loaded at open; lookups hit the
//! in-memory map. Concurrent readers share the map behind an `RwLock`;
//! appends are serialized through a `Mutex`'d file handle.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::GenerationParams;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cache record serialization: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// One cached completion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CacheRecord {
    pub cache_key: String,
    pub prompt: String,
    pub params: GenerationParams,
    pub response: String,
    pub timestamp: u64,
}

/// File-backed response cache.
pub struct ResponseCache {
    path: PathBuf,
    map: RwLock<HashMap<String, String>>,
    writer: Mutex<File>,
    corrupt_lines: usize,
}

impl ResponseCache {
    /// Opens (creating if needed) the cache file and loads every record.
    /// A torn trailing line from an interrupted run is skipped, not fatal.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CacheError> {
        let path = path.as_ref().to_path_buf();
        let io_err = |source| CacheError::Io {
            path: path.display().to_string(),
            source,
        };
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(io_err)?;
            }
        }
        let mut map = HashMap::new();
        let mut corrupt_lines = 0;
        match File::open(&path) {
            Ok(file) => {
                for line in BufReader::new(file).lines() {
                    let line = line.map_err(io_err)?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    match serde_json::from_str::<CacheRecord>(&line) {
                        Ok(record) => {
                            map.insert(record.cache_key, record.response);
                        }
                        Err(_) => corrupt_lines += 1,
                    }
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(io_err(e)),
        }
        let writer = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err)?;
        Ok(ResponseCache {
            path,
            map: RwLock::new(map),
            writer: Mutex::new(writer),
            corrupt_lines,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Lines skipped at load time because they did not parse.
    pub fn corrupt_lines(&self) -> usize {
        self.corrupt_lines
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.map.read().expect("cache lock").get(key).cloned()
    }

    /// Stores a response, appending to the file. Re-storing an existing
    /// key is a no-op, so replays never grow the file.
    pub fn store(
        &self,
        key: &str,
        prompt: &str,
        params: &GenerationParams,
        response: &str,
    ) -> Result<(), CacheError> {
        {
            let mut map = self.map.write().expect("cache lock");
            if map.contains_key(key) {
                return Ok(());
            }
            map.insert(key.to_string(), response.to_string());
        }
        let record = CacheRecord {
            cache_key: key.to_string(),
            prompt: prompt.to_string(),
            params: params.clone(),
            response: response.to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let line = serde_json::to_string(&record)?;
        let mut writer = self.writer.lock().expect("cache writer lock");
        writeln!(writer, "{line}").map_err(|source| CacheError::Io {
            path: self.path.display().to_string(),
            source,
        })?;
        writer.flush().map_err(|source| CacheError::Io {
            path: self.path.display().to_string(),
            source,
        })
    }
}
