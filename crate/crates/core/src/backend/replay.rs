//! Record/replay cache over an append-only JSONL file.
//!
//! Without a fallback every prompt must already be in the cache and no other
//! backend is ever called. With a fallback, misses are forwarded and the
//! answers appended, which is also how an interrupted run resumes.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{record_replay_key, Backend, BackendError, BackendResponse, GenerationParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub raw_text: String,
    pub latency_seconds: f64,
    pub params: GenerationParams,
}

pub struct ReplayBackend {
    path: PathBuf,
    entries: RwLock<HashMap<String, CacheEntry>>,
    fallback: Option<Box<dyn Backend>>,
    writer: Option<Mutex<BufWriter<File>>>,
}

impl ReplayBackend {
    /// Opens a cache read-only. A missing file is an error.
    pub fn open(path: &Path) -> Result<Self, BackendError> {
        let entries = load_entries(path)?
            .ok_or_else(|| BackendError::Cache(format!("{} does not exist", path.display())))?;
        Ok(Self {
            path: path.to_owned(),
            entries: RwLock::new(entries),
            fallback: None,
            writer: None,
        })
    }

    /// Opens (or creates) a cache that forwards misses to `fallback` and
    /// records the answers.
    pub fn recording(path: &Path, fallback: Box<dyn Backend>) -> Result<Self, BackendError> {
        let entries = load_entries(path)?.unwrap_or_default();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| BackendError::Cache(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_owned(),
            entries: RwLock::new(entries),
            fallback: Some(fallback),
            writer: Some(Mutex::new(BufWriter::new(file))),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn append(&self, entry: &CacheEntry) -> Result<(), BackendError> {
        let Some(writer) = &self.writer else { return Ok(()) };
        let mut line = serde_json::to_vec(entry).map_err(|e| BackendError::Cache(e.to_string()))?;
        line.push(b'\n');
        let mut w = writer.lock().expect("cache writer lock");
        w.write_all(&line)
            .and_then(|_| w.flush())
            .map_err(|e| BackendError::Cache(format!("{}: {e}", self.path.display())))
    }
}

fn load_entries(path: &Path) -> Result<Option<HashMap<String, CacheEntry>>, BackendError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(BackendError::Cache(format!("{}: {e}", path.display()))),
    };
    let mut entries = HashMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| BackendError::Cache(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: CacheEntry = serde_json::from_str(&line)
            .map_err(|e| BackendError::Cache(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        entries.insert(entry.key.clone(), entry);
    }
    Ok(Some(entries))
}

impl Backend for ReplayBackend {
    fn id(&self) -> &str {
        "replay"
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<BackendResponse, BackendError> {
        let key = record_replay_key(prompt, params);
        if let Some(hit) = self.entries.read().expect("cache lock").get(&key) {
            return Ok(BackendResponse {
                raw_text: hit.raw_text.clone(),
                latency_seconds: hit.latency_seconds,
                backend_id: self.id().to_owned(),
                cached: true,
            });
        }
        let Some(fallback) = &self.fallback else {
            return Err(BackendError::CacheMiss);
        };
        let response = fallback.complete(prompt, params)?;
        let entry = CacheEntry {
            key: key.clone(),
            raw_text: response.raw_text.clone(),
            latency_seconds: response.latency_seconds,
            params: *params,
        };
        self.append(&entry)?;
        self.entries.write().expect("cache lock").insert(key, entry);
        Ok(response)
    }

    fn probe(&self) -> Result<(), BackendError> {
        match &self.fallback {
            Some(f) => f.probe(),
            None => Ok(()),
        }
    }
}
