//! End-to-end flows shared by the CLI and the integration tests.

use std::path::Path;

use thiserror::Error;

use crate::align::{align, AlignError, AlignmentPair, AlignmentParams, AlignmentResult};
use crate::corpus::Corpus;
use crate::embed::{embed_corpus_pair, Clock, EmbedError, EmbeddingProvider, RateLimiterConfig};
use crate::eval::{evaluate_f1, EvalError, F1Report, GoldAlignment};
use crate::matrix::EmbeddingMatrix;
use crate::rng::seeded_permutation;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("matrix has {matrix_rows} rows but the {side} corpus has {corpus_len} sentences")]
    RowCountMismatch {
        side: &'static str,
        matrix_rows: usize,
        corpus_len: usize,
    },
}

/// Check that a matrix still lines up with its corpus row for row.
pub fn check_row_correspondence(
    side: &'static str,
    matrix: &EmbeddingMatrix,
    corpus: &Corpus,
) -> Result<(), PipelineError> {
    if matrix.n_rows() != corpus.len() {
        return Err(PipelineError::RowCountMismatch {
            side,
            matrix_rows: matrix.n_rows(),
            corpus_len: corpus.len(),
        });
    }
    Ok(())
}

/// Outcome of a gold benchmark run.
#[derive(Debug)]
pub struct GoldBenchOutcome {
    pub report: F1Report,
    /// Predictions mapped back to original target indices.
    pub result: AlignmentResult,
    /// The target permutation that was applied before aligning.
    pub permutation: Vec<usize>,
}

/// Benchmark an aligner against parallel corpora where line `i` pairs
/// with line `i`.
///
/// The target side is shuffled with a seeded permutation before anything
/// is embedded, so trivial index equality cannot mask bugs, and the
/// predictions are mapped back through the permutation before scoring
/// against the identity gold.
#[allow(clippy::too_many_arguments)]
pub fn run_gold_benchmark(
    src: &Corpus,
    tgt: &Corpus,
    src_provider: &dyn EmbeddingProvider,
    tgt_provider: &dyn EmbeddingProvider,
    rate: &RateLimiterConfig,
    cache_path: impl AsRef<Path>,
    clock: &dyn Clock,
    params: &AlignmentParams,
    shuffle_seed: u64,
) -> Result<GoldBenchOutcome, PipelineError> {
    if src.len() != tgt.len() {
        return Err(EvalError::LineCountMismatch {
            src_lines: src.len(),
            tgt_lines: tgt.len(),
        }
        .into());
    }
    let permutation = seeded_permutation(tgt.len(), shuffle_seed);
    let shuffled_texts: Vec<String> = permutation
        .iter()
        .map(|&orig| tgt.sentences[orig].text.clone())
        .collect();
    let shuffled = Corpus::from_texts(tgt.language_tag.clone(), shuffled_texts);

    let (src_m, tgt_m, _stats) = embed_corpus_pair(
        src,
        &shuffled,
        src_provider,
        tgt_provider,
        rate,
        cache_path,
        clock,
    )?;
    check_row_correspondence("source", &src_m, src)?;
    check_row_correspondence("target", &tgt_m, &shuffled)?;

    let raw = align(&src_m, &tgt_m, params)?;
    let pairs: Vec<AlignmentPair> = raw
        .pairs
        .iter()
        .map(|p| AlignmentPair {
            tgt_idx: permutation[p.tgt_idx],
            ..*p
        })
        .collect();
    let result = AlignmentResult {
        pairs,
        params: raw.params.clone(),
        n_src: raw.n_src,
        n_tgt: raw.n_tgt,
    };

    let gold = GoldAlignment::identity(src.len());
    let report = evaluate_f1(&result, &gold)?;
    Ok(GoldBenchOutcome {
        report,
        result,
        permutation,
    })
}
