//! Mining parallel sentence pairs from two monolingual corpora by placing
//! every sentence in a shared multilingual embedding space and matching
//! them there.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`corpus`]: sentence splitting, tokenization, and length filtering.
//! - [`embed`]: pluggable embedding providers, batch scheduling under a
//!   request budget, and an append-only on-disk vector cache.
//! - [`align`]: blockwise exact retrieval with nearest-neighbour,
//!   inverted nearest-neighbour, inverted softmax, and CSLS criteria.
//! - [`eval`]: micro-F1 against gold pairings, pair statistics, and the
//!   human-annotation round trip.
//! - [`pipeline`]: end-to-end flows composing the above.

pub mod align;
pub mod corpus;
pub mod embed;
pub mod eval;
pub mod matrix;
pub mod pipeline;
pub mod rng;

pub use align::{
    align, AlignError, AlignmentPair, AlignmentParams, AlignmentResult, Method, TsvPair,
};
pub use corpus::{
    clean_corpus, CleanOptions, Corpus, PrepError, PrepReport, RawDocument, Sentence,
    SentenceSplitter,
};
pub use embed::{
    build_provider, embed_corpus, embed_corpus_pair, plan_batches, CacheFile, CacheRecord, Clock,
    EmbedError, EmbedStats, EmbeddingProvider, ProviderConfig, ProviderError, ProviderKind,
    RateLimiterConfig, Side, SimClock, SystemClock,
};
pub use eval::{EvalError, F1Report, GoldAlignment, LabelDistribution, PairStats};
pub use matrix::{EmbeddingMatrix, MatrixError};
pub use pipeline::{run_gold_benchmark, GoldBenchOutcome, PipelineError};
