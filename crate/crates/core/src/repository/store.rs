//! Append-only journey store.
//!
//! Layout under the store root:
//!
//! ```text
//! journeys/<id>.json        canonical journey document
//! journeys/<id>.meta.json   provenance record (StoredMeta)
//! index.jsonl               one StoredMeta per line, rebuilt from the sidecars
//! ```
//!
//! Files are written to a temporary name and renamed into place, and an
//! entry becomes visible to readers only after both files exist, so a crash
//! leaves at worst an orphaned document that the next open ignores.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical::{parse_journey, serialize_journey};
use crate::model::Journey;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("storage I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt store entry {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("unknown parent journey {0}")]
    UnknownParent(String),
    #[error("journey cannot be stored: {0}")]
    Unserializable(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Provenance of a stored journey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredMeta {
    pub id: String,
    /// Unix seconds.
    pub uploaded_utc: f64,
    pub uploader_token: String,
    pub derived_from: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredJourney {
    pub meta: StoredMeta,
    pub journey: Journey,
    /// The canonical document as stored on disk.
    pub document: String,
}

impl StoredJourney {
    pub fn id(&self) -> &str {
        &self.meta.id
    }
}

/// Content-derived identifier: 32 hex digits of SHA-256 over `parts`.
pub fn content_id(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(&h.finalize()[..16])
}

#[derive(Debug)]
pub struct JourneyStore {
    root: PathBuf,
    entries: RwLock<HashMap<String, Arc<StoredJourney>>>,
    writer: Mutex<()>,
}

impl JourneyStore {
    /// Opens (creating if needed) a store rooted at `root` and rebuilds the
    /// index from the sidecar files.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let dir = root.join("journeys");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut entries = HashMap::new();
        for item in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = item.map_err(io_err(&dir))?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            let Some(id) = name.strip_suffix(".meta.json") else {
                continue;
            };
            let meta_text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let meta: StoredMeta =
                serde_json::from_str(&meta_text).map_err(|e| StoreError::Corrupt {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
            let doc_path = dir.join(format!("{id}.json"));
            let document = fs::read_to_string(&doc_path).map_err(io_err(&doc_path))?;
            let journey = parse_journey(&document).map_err(|e| StoreError::Corrupt {
                path: doc_path.clone(),
                reason: e.to_string(),
            })?;
            entries.insert(
                meta.id.clone(),
                Arc::new(StoredJourney {
                    meta,
                    journey,
                    document,
                }),
            );
        }
        let store = JourneyStore {
            root,
            entries: RwLock::new(entries),
            writer: Mutex::new(()),
        };
        store.rewrite_index()?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn get(&self, id: &str) -> Option<Arc<StoredJourney>> {
        self.entries.read().expect("store index").get(id).cloned()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.read().expect("store index").contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("store index").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All entries ordered by upload time, then id.
    pub fn list(&self) -> Vec<Arc<StoredJourney>> {
        let mut all: Vec<_> = self
            .entries
            .read()
            .expect("store index")
            .values()
            .cloned()
            .collect();
        all.sort_by(|a, b| {
            a.meta
                .uploaded_utc
                .total_cmp(&b.meta.uploaded_utc)
                .then_with(|| a.meta.id.cmp(&b.meta.id))
        });
        all
    }

    /// Stores `journey` under `meta.id` unless that id already exists.
    /// Returns the stored entry and whether it was newly created.
    pub fn insert(
        &self,
        meta: StoredMeta,
        journey: Journey,
    ) -> Result<(Arc<StoredJourney>, bool), StoreError> {
        let _guard = self.writer.lock().expect("store writer");
        if let Some(existing) = self.get(&meta.id) {
            return Ok((existing, false));
        }
        if let Some(parent) = &meta.derived_from {
            if !self.contains(parent) {
                return Err(StoreError::UnknownParent(parent.clone()));
            }
        }
        let document =
            serialize_journey(&journey).map_err(|e| StoreError::Unserializable(e.to_string()))?;
        let dir = self.root.join("journeys");
        write_atomic(&dir.join(format!("{}.json", meta.id)), document.as_bytes())?;
        let meta_text = serde_json::to_string(&meta).expect("meta serializes");
        write_atomic(&dir.join(format!("{}.meta.json", meta.id)), meta_text.as_bytes())?;
        let index = self.root.join("index.jsonl");
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&index)
            .map_err(io_err(&index))?;
        writeln!(f, "{meta_text}").map_err(io_err(&index))?;

        let entry = Arc::new(StoredJourney {
            meta,
            journey,
            document,
        });
        self.entries
            .write()
            .expect("store index")
            .insert(entry.meta.id.clone(), entry.clone());
        Ok((entry, true))
    }

    fn rewrite_index(&self) -> Result<(), StoreError> {
        let text: String = self
            .list()
            .iter()
            .map(|e| serde_json::to_string(&e.meta).expect("meta serializes") + "\n")
            .collect();
        write_atomic(&self.root.join("index.jsonl"), text.as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}
