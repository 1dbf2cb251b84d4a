//! Chunking and window planning for rate-limited embedding requests.
//!
//! Texts are cut into chunks of at most `chunk_size`, source side first,
//! then chunks are packed greedily into windows of at most
//! `max_texts_per_window` texts. One window is downloaded per
//! `window_seconds`, sleeping between windows but not after the last one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which corpus a chunk belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Source,
    Target,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Source => write!(f, "source"),
            Side::Target => write!(f, "target"),
        }
    }
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "source" => Ok(Side::Source),
            "target" => Ok(Side::Target),
            other => Err(format!("unknown side {other:?}, expected source or target")),
        }
    }
}

/// Request budget: at most `max_texts_per_window` texts per
/// `window_seconds`, requested in chunks of at most `chunk_size`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RateLimiterConfig {
    pub window_seconds: f64,
    pub max_texts_per_window: usize,
    pub chunk_size: usize,
}

impl Default for RateLimiterConfig {
    fn default() -> Self {
        Self {
            window_seconds: 61.0,
            max_texts_per_window: 4000,
            chunk_size: 2000,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RateConfigError {
    #[error("{field} must be positive")]
    NonPositive { field: &'static str },
    #[error("chunk_size ({chunk_size}) exceeds max_texts_per_window ({max_texts})")]
    ChunkExceedsWindow { chunk_size: usize, max_texts: usize },
}

impl RateLimiterConfig {
    pub fn validate(&self) -> Result<(), RateConfigError> {
        if self.window_seconds.is_nan() || self.window_seconds <= 0.0 {
            return Err(RateConfigError::NonPositive {
                field: "window_seconds",
            });
        }
        if self.max_texts_per_window == 0 {
            return Err(RateConfigError::NonPositive {
                field: "max_texts_per_window",
            });
        }
        if self.chunk_size == 0 {
            return Err(RateConfigError::NonPositive {
                field: "chunk_size",
            });
        }
        if self.chunk_size > self.max_texts_per_window {
            return Err(RateConfigError::ChunkExceedsWindow {
                chunk_size: self.chunk_size,
                max_texts: self.max_texts_per_window,
            });
        }
        Ok(())
    }

    pub fn window_duration(&self) -> std::time::Duration {
        std::time::Duration::from_secs_f64(self.window_seconds)
    }
}

/// One contiguous run of texts from one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chunk {
    pub side: Side,
    pub start: usize,
    pub len: usize,
}

/// The full download schedule: ordered chunks, packed into windows of
/// chunk indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    pub chunks: Vec<Chunk>,
    pub windows: Vec<Vec<usize>>,
}

impl BatchPlan {
    pub fn n_chunks(&self) -> usize {
        self.chunks.len()
    }

    pub fn n_windows(&self) -> usize {
        self.windows.len()
    }

    /// Sleeps happen between windows only.
    pub fn n_sleeps(&self) -> usize {
        self.windows.len().saturating_sub(1)
    }
}

fn side_chunks(side: Side, n: usize, chunk_size: usize, out: &mut Vec<Chunk>) {
    let mut start = 0;
    while start < n {
        let len = chunk_size.min(n - start);
        out.push(Chunk { side, start, len });
        start += len;
    }
}

/// Plan the download schedule for `n_src` source and `n_tgt` target texts.
pub fn plan_batches(n_src: usize, n_tgt: usize, cfg: &RateLimiterConfig) -> BatchPlan {
    debug_assert!(cfg.validate().is_ok());
    let mut chunks = Vec::new();
    side_chunks(Side::Source, n_src, cfg.chunk_size, &mut chunks);
    side_chunks(Side::Target, n_tgt, cfg.chunk_size, &mut chunks);

    let mut windows: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut current_texts = 0;
    for (idx, chunk) in chunks.iter().enumerate() {
        if current_texts + chunk.len > cfg.max_texts_per_window && !current.is_empty() {
            windows.push(std::mem::take(&mut current));
            current_texts = 0;
        }
        current.push(idx);
        current_texts += chunk.len;
    }
    if !current.is_empty() {
        windows.push(current);
    }
    BatchPlan { chunks, windows }
}
