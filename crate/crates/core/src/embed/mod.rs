//! Embedding providers, request scheduling, and corpus embedding.
//!
//! A provider turns a batch of texts into raw vectors. [`embed_corpus`]
//! and [`embed_corpus_pair`] drive a provider under the configured rate
//! budget, persist every raw vector to the on-disk cache, skip texts that
//! are already cached, and hand back unit-normalized matrices whose row
//! `i` is sentence `i`.

pub mod batch;
pub mod cache;
pub mod clock;
pub mod hash;
pub mod oracle;
pub mod remote;

pub use batch::{plan_batches, BatchPlan, Chunk, RateConfigError, RateLimiterConfig, Side};
pub use cache::{cache_get, cache_put, embedding_key, CacheError, CacheFile, CacheRecord};
pub use clock::{Clock, SimClock, SystemClock};
pub use hash::hash_embed;
pub use oracle::{oracle_embed, parse_pair_id, synthetic_pair_texts};
pub use remote::{FieldMap, RemoteProvider};

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::matrix::{EmbeddingMatrix, MatrixError};

/// Which backend to embed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Remote,
    HashMock,
    Oracle,
}

impl std::str::FromStr for ProviderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "remote" => Ok(ProviderKind::Remote),
            "hash_mock" => Ok(ProviderKind::HashMock),
            "oracle" => Ok(ProviderKind::Oracle),
            other => Err(format!(
                "unknown provider {other:?}, expected remote, hash_mock or oracle"
            )),
        }
    }
}

/// Provider selection and connection settings.
///
/// `model_id` and `input_type` take part in cache keys, so two configs
/// that should not share vectors (for example oracle runs at different
/// noise levels) must use distinct `model_id`s.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    /// Remote only. HTTPS endpoint accepting the JSON batch request.
    pub endpoint_url: String,
    pub model_id: String,
    pub input_type: String,
    pub dim: usize,
    /// Name of the environment variable holding the API credential.
    pub api_key_env: String,
    /// Seed for the hash_mock and oracle providers.
    pub seed: u64,
    /// Target-side noise scale for the oracle provider.
    pub noise_sigma: f64,
    /// JSON field names for the remote request and response.
    pub fields: FieldMap,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::HashMock,
            endpoint_url: String::new(),
            model_id: "hash-mock".to_string(),
            input_type: "search_document".to_string(),
            dim: 768,
            api_key_env: "EMBED_API_KEY".to_string(),
            seed: 42,
            noise_sigma: 0.0,
            fields: FieldMap::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("missing or rejected credential: {0}")]
    Auth(String),
    #[error("provider rate limit hit")]
    RateLimited,
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("provider returned {got} vectors for {expected} texts")]
    WrongCount { expected: usize, got: usize },
    #[error("provider returned a vector of length {got}, expected {expected}")]
    WrongDimension { expected: usize, got: usize },
    #[error("oracle provider found no pair id digits in text: {0:?}")]
    MissingPairId(String),
    #[error("invalid provider config: {0}")]
    Config(String),
    #[error("giving up after {attempts} attempts: {last}")]
    Exhausted {
        attempts: u32,
        #[source]
        last: Box<ProviderError>,
    },
}

/// One embedding backend. Implementations perform a single request
/// attempt; the retry policy lives in [`request_embeddings`].
pub trait EmbeddingProvider: Send + Sync {
    fn model_id(&self) -> &str;
    fn input_type(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, ProviderError>;
}

/// Deterministic mock backend over [`hash_embed`].
pub struct HashMockProvider {
    model_id: String,
    input_type: String,
    dim: usize,
    seed: u64,
}

impl HashMockProvider {
    pub fn new(model_id: &str, input_type: &str, dim: usize, seed: u64) -> Self {
        Self {
            model_id: model_id.to_string(),
            input_type: input_type.to_string(),
            dim,
            seed,
        }
    }
}

impl EmbeddingProvider for HashMockProvider {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn input_type(&self) -> &str {
        &self.input_type
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, ProviderError> {
        Ok(texts
            .iter()
            .map(|t| hash_embed(t, self.dim, self.seed))
            .collect())
    }
}

/// Ground-truth backend over [`oracle_embed`]. The pair id is parsed from
/// the first digit run of each text; the side is fixed per provider.
pub struct OracleProvider {
    model_id: String,
    input_type: String,
    dim: usize,
    seed: u64,
    side: Side,
    noise_sigma: f64,
}

impl OracleProvider {
    pub fn new(
        model_id: &str,
        input_type: &str,
        dim: usize,
        seed: u64,
        side: Side,
        noise_sigma: f64,
    ) -> Self {
        Self {
            model_id: model_id.to_string(),
            input_type: input_type.to_string(),
            dim,
            seed,
            side,
            noise_sigma,
        }
    }
}

impl EmbeddingProvider for OracleProvider {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn input_type(&self) -> &str {
        &self.input_type
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, ProviderError> {
        texts
            .iter()
            .map(|t| {
                let pair_id =
                    parse_pair_id(t).ok_or_else(|| ProviderError::MissingPairId(t.clone()))?;
                Ok(oracle_embed(
                    pair_id,
                    self.side,
                    self.noise_sigma,
                    self.dim,
                    self.seed,
                ))
            })
            .collect()
    }
}

/// Construct the provider described by `cfg`. `side` matters only for the
/// oracle kind; remote credentials are checked here, before any network
/// traffic.
pub fn build_provider(
    cfg: &ProviderConfig,
    side: Side,
) -> Result<Box<dyn EmbeddingProvider>, ProviderError> {
    if cfg.dim == 0 {
        return Err(ProviderError::Config("dim must be positive".to_string()));
    }
    match cfg.kind {
        ProviderKind::HashMock => Ok(Box::new(HashMockProvider::new(
            &cfg.model_id,
            &cfg.input_type,
            cfg.dim,
            cfg.seed,
        ))),
        ProviderKind::Oracle => Ok(Box::new(OracleProvider::new(
            &cfg.model_id,
            &cfg.input_type,
            cfg.dim,
            cfg.seed,
            side,
            cfg.noise_sigma,
        ))),
        ProviderKind::Remote => Ok(Box::new(RemoteProvider::from_config(cfg)?)),
    }
}

/// How failed requests are retried. Rate-limit responses wait a full
/// window; transport failures back off exponentially. Authentication and
/// shape errors abort immediately.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub rate_limit_wait: Duration,
    pub max_rate_limit_retries: u32,
    pub transport_backoff: Vec<Duration>,
}

impl RetryPolicy {
    pub fn from_rate(rate: &RateLimiterConfig) -> Self {
        Self {
            rate_limit_wait: rate.window_duration(),
            max_rate_limit_retries: 5,
            transport_backoff: [1, 2, 4, 8, 16]
                .into_iter()
                .map(Duration::from_secs)
                .collect(),
        }
    }
}

/// Request embeddings for one chunk of texts, retrying per `policy`, and
/// validate that the response has one vector of the right length per text.
pub fn request_embeddings(
    texts: &[String],
    provider: &dyn EmbeddingProvider,
    policy: &RetryPolicy,
    clock: &dyn Clock,
) -> Result<Vec<Vec<f32>>, ProviderError> {
    let mut rate_retries: u32 = 0;
    let mut transport_failures: u32 = 0;
    loop {
        match provider.embed_batch(texts) {
            Ok(rows) => {
                if rows.len() != texts.len() {
                    return Err(ProviderError::WrongCount {
                        expected: texts.len(),
                        got: rows.len(),
                    });
                }
                if let Some(bad) = rows.iter().find(|r| r.len() != provider.dim()) {
                    return Err(ProviderError::WrongDimension {
                        expected: provider.dim(),
                        got: bad.len(),
                    });
                }
                return Ok(rows);
            }
            Err(ProviderError::RateLimited) => {
                if rate_retries == policy.max_rate_limit_retries {
                    return Err(ProviderError::Exhausted {
                        attempts: rate_retries + 1,
                        last: Box::new(ProviderError::RateLimited),
                    });
                }
                clock.sleep(policy.rate_limit_wait);
                rate_retries += 1;
            }
            Err(ProviderError::Transport(reason)) => {
                if transport_failures as usize == policy.transport_backoff.len() {
                    return Err(ProviderError::Exhausted {
                        attempts: transport_failures + 1,
                        last: Box::new(ProviderError::Transport(reason)),
                    });
                }
                clock.sleep(policy.transport_backoff[transport_failures as usize]);
                transport_failures += 1;
            }
            Err(other) => return Err(other),
        }
    }
}

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    RateConfig(#[from] RateConfigError),
    #[error("cached vector for key {key} has dim {got}, expected {expected}")]
    CachedDimension {
        key: String,
        expected: usize,
        got: usize,
    },
}

/// Counters describing one embedding run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EmbedStats {
    pub n_texts: usize,
    pub n_cache_hits: usize,
    pub n_requested: usize,
    pub n_chunks: usize,
    pub n_windows: usize,
    pub n_sleeps: usize,
}

struct SideJob<'a> {
    corpus: &'a Corpus,
    provider: &'a dyn EmbeddingProvider,
    keys: Vec<String>,
    uncached: Vec<usize>,
}

impl<'a> SideJob<'a> {
    fn new(
        corpus: &'a Corpus,
        provider: &'a dyn EmbeddingProvider,
        cached: &std::collections::HashMap<String, CacheRecord>,
    ) -> Self {
        let keys: Vec<String> = corpus
            .sentences
            .iter()
            .map(|s| embedding_key(provider.model_id(), provider.input_type(), &s.text))
            .collect();
        let uncached = keys
            .iter()
            .enumerate()
            .filter(|(_, k)| !cached.contains_key(*k))
            .map(|(i, _)| i)
            .collect();
        Self {
            corpus,
            provider,
            keys,
            uncached,
        }
    }
}

fn embed_sides(
    jobs: &mut [SideJob<'_>],
    rate: &RateLimiterConfig,
    cache: &CacheFile,
    mut cached: std::collections::HashMap<String, CacheRecord>,
    clock: &dyn Clock,
) -> Result<(Vec<EmbeddingMatrix>, EmbedStats), EmbedError> {
    rate.validate()?;
    let policy = RetryPolicy::from_rate(rate);

    let n_src_uncached = jobs.first().map(|j| j.uncached.len()).unwrap_or(0);
    let n_tgt_uncached = jobs.get(1).map(|j| j.uncached.len()).unwrap_or(0);
    let plan = plan_batches(n_src_uncached, n_tgt_uncached, rate);

    let mut stats = EmbedStats {
        n_texts: jobs.iter().map(|j| j.corpus.len()).sum(),
        n_requested: n_src_uncached + n_tgt_uncached,
        n_chunks: plan.n_chunks(),
        n_windows: plan.n_windows(),
        n_sleeps: plan.n_sleeps(),
        ..EmbedStats::default()
    };
    stats.n_cache_hits = stats.n_texts - stats.n_requested;

    for (w_idx, window) in plan.windows.iter().enumerate() {
        for &chunk_idx in window {
            let chunk = plan.chunks[chunk_idx];
            let job = match chunk.side {
                Side::Source => &jobs[0],
                Side::Target => &jobs[1],
            };
            let sentence_indices = &job.uncached[chunk.start..chunk.start + chunk.len];
            let texts: Vec<String> = sentence_indices
                .iter()
                .map(|&i| job.corpus.sentences[i].text.clone())
                .collect();
            let rows = request_embeddings(&texts, job.provider, &policy, clock)?;
            let records: Vec<CacheRecord> = sentence_indices
                .iter()
                .zip(rows)
                .map(|(&i, vector)| CacheRecord {
                    key: job.keys[i].clone(),
                    dim: job.provider.dim(),
                    vector,
                })
                .collect();
            cache.append(&records)?;
            for r in records {
                cached.insert(r.key.clone(), r);
            }
        }
        if w_idx + 1 < plan.windows.len() {
            clock.sleep(rate.window_duration());
        }
    }

    let mut matrices = Vec::with_capacity(jobs.len());
    for job in jobs.iter() {
        let dim = job.provider.dim();
        let mut rows: Vec<&[f32]> = Vec::with_capacity(job.corpus.len());
        for key in &job.keys {
            let record = cached
                .get(key)
                .expect("every sentence was cached or just fetched");
            if record.dim != dim {
                return Err(EmbedError::CachedDimension {
                    key: key.clone(),
                    expected: dim,
                    got: record.dim,
                });
            }
            rows.push(&record.vector);
        }
        let raw = EmbeddingMatrix::from_rows(dim, &rows)?;
        matrices.push(raw.normalize_rows()?);
    }
    Ok((matrices, stats))
}

/// Embed one corpus, reusing and extending the cache at `cache_path`.
pub fn embed_corpus(
    corpus: &Corpus,
    provider: &dyn EmbeddingProvider,
    rate: &RateLimiterConfig,
    cache_path: impl AsRef<Path>,
    clock: &dyn Clock,
) -> Result<(EmbeddingMatrix, EmbedStats), EmbedError> {
    let cache = CacheFile::new(cache_path.as_ref());
    let cached = cache.load()?;
    let mut jobs = [SideJob::new(corpus, provider, &cached)];
    let (mut matrices, stats) = embed_sides(&mut jobs, rate, &cache, cached, clock)?;
    Ok((matrices.remove(0), stats))
}

/// Embed a source and a target corpus under one shared schedule, so that
/// windows can mix trailing source chunks with leading target chunks.
#[allow(clippy::too_many_arguments)]
pub fn embed_corpus_pair(
    src: &Corpus,
    tgt: &Corpus,
    src_provider: &dyn EmbeddingProvider,
    tgt_provider: &dyn EmbeddingProvider,
    rate: &RateLimiterConfig,
    cache_path: impl AsRef<Path>,
    clock: &dyn Clock,
) -> Result<(EmbeddingMatrix, EmbeddingMatrix, EmbedStats), EmbedError> {
    let cache = CacheFile::new(cache_path.as_ref());
    let cached = cache.load()?;
    let mut jobs = [
        SideJob::new(src, src_provider, &cached),
        SideJob::new(tgt, tgt_provider, &cached),
    ];
    let (mut matrices, stats) = embed_sides(&mut jobs, rate, &cache, cached, clock)?;
    let tgt_m = matrices.remove(1);
    let src_m = matrices.remove(0);
    Ok((src_m, tgt_m, stats))
}
