//! Append-only on-disk embedding cache.
//!
//! One record per line:
//!
//! ```text
//! <64-char lowercase hex sha256 key>\t<dim>\t<base64 of little-endian f32 bytes>\n
//! ```
//!
//! Keys are `sha256(model_id + "\n" + input_type + "\n" + sentence_text)`.
//! Cached vectors are the raw provider output, before normalization, so
//! changing the similarity function never invalidates a cache. Appends are
//! single writes of whole lines; readers validate every line and the last
//! record written for a key wins, which lets interrupted runs resume by
//! appending.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// One persisted embedding: content key, dimension, raw vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheRecord {
    pub key: String,
    pub dim: usize,
    pub vector: Vec<f32>,
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt cache record at {path} line {line}: {reason}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

/// Content-address of a sentence embedding under a given model and input
/// type, as 64 lowercase hex characters.
pub fn embedding_key(model_id: &str, input_type: &str, text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(model_id.as_bytes());
    hasher.update(b"\n");
    hasher.update(input_type.as_bytes());
    hasher.update(b"\n");
    hasher.update(text.as_bytes());
    to_hex(&hasher.finalize())
}

pub(crate) fn to_hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn encode_line(record: &CacheRecord, out: &mut Vec<u8>) {
    let mut bytes = Vec::with_capacity(record.vector.len() * 4);
    for v in &record.vector {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(record.key.as_bytes());
    out.push(b'\t');
    out.extend_from_slice(record.dim.to_string().as_bytes());
    out.push(b'\t');
    out.extend_from_slice(BASE64.encode(&bytes).as_bytes());
    out.push(b'\n');
}

fn parse_line(path: &Path, line_no: usize, line: &str) -> Result<CacheRecord, CacheError> {
    let corrupt = |reason: String| CacheError::Corrupt {
        path: path.to_path_buf(),
        line: line_no,
        reason,
    };
    let mut parts = line.split('\t');
    let (key, dim, b64) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(d), Some(b), None) => (k, d, b),
        _ => return Err(corrupt("expected 3 tab-separated fields".to_string())),
    };
    if key.len() != 64 || !key.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
        return Err(corrupt(format!("invalid key {key:?}")));
    }
    let dim: usize = dim
        .parse()
        .map_err(|_| corrupt(format!("invalid dim {dim:?}")))?;
    if dim == 0 {
        return Err(corrupt("dim must be positive".to_string()));
    }
    let bytes = BASE64
        .decode(b64)
        .map_err(|e| corrupt(format!("invalid base64: {e}")))?;
    if bytes.len() != dim * 4 {
        return Err(corrupt(format!(
            "vector has {} bytes, expected {}",
            bytes.len(),
            dim * 4
        )));
    }
    let vector = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(CacheRecord {
        key: key.to_string(),
        dim,
        vector,
    })
}

/// Handle to a cache file. The file does not need to exist yet. Any
/// number of readers may load concurrently; writers must be serialized
/// by the caller (the embedding pipeline keeps a single writer).
#[derive(Debug, Clone)]
pub struct CacheFile {
    path: PathBuf,
}

impl CacheFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn io_err(&self, source: io::Error) -> CacheError {
        CacheError::Io {
            path: self.path.clone(),
            source,
        }
    }

    /// Load every record, last write per key winning. A missing file is an
    /// empty cache; any malformed line is an error naming the line number.
    pub fn load(&self) -> Result<HashMap<String, CacheRecord>, CacheError> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(HashMap::new()),
            Err(e) => return Err(self.io_err(e)),
        };
        let mut map = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| self.io_err(e))?;
            let record = parse_line(&self.path, i + 1, &line)?;
            map.insert(record.key.clone(), record);
        }
        Ok(map)
    }

    /// Append records as whole lines in one write, then flush.
    pub fn append(&self, records: &[CacheRecord]) -> Result<(), CacheError> {
        if records.is_empty() {
            return Ok(());
        }
        let mut buf = Vec::new();
        for r in records {
            encode_line(r, &mut buf);
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| self.io_err(e))?;
        file.write_all(&buf).map_err(|e| self.io_err(e))?;
        file.flush().map_err(|e| self.io_err(e))?;
        Ok(())
    }
}

/// Append a single record to the cache at `path`.
pub fn cache_put(record: &CacheRecord, path: impl AsRef<Path>) -> Result<(), CacheError> {
    CacheFile::new(path.as_ref()).append(std::slice::from_ref(record))
}

/// Fetch the last record written for `key`, if any.
pub fn cache_get(key: &str, path: impl AsRef<Path>) -> Result<Option<CacheRecord>, CacheError> {
    Ok(CacheFile::new(path.as_ref()).load()?.remove(key))
}
