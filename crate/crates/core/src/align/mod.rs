//! Alignment engine: one best target per source sentence, blockwise.
//!
//! All four retrieval criteria reduce to dot products of unit rows, so
//! every method walks the source (or target) matrix in blocks of
//! `block_size` rows and never materializes the full similarity table.
//! Similarities accumulate in f64 and per-pair values do not depend on
//! block boundaries or thread count, which makes the emitted pairs
//! byte-reproducible for fixed inputs and parameters.
//!
//! Methods:
//! - `nn`: plain cosine argmax.
//! - `invnn`: rank of the source among all sources from the target's
//!   perspective; fewer better, cosine breaks rank ties.
//! - `invsoftmax`: softmax over sources for a fixed target at inverse
//!   temperature `beta`, stabilized with log-sum-exp.
//! - `csls`: cosine penalized by each side's mean similarity to its `k`
//!   nearest cross-domain neighbors.
//!
//! Remaining ties always go to the lowest target index.

pub mod tsv;

pub use tsv::{read_tsv, write_tsv, TsvError, TsvPair};

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{dot, EmbeddingMatrix};

/// Retrieval criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "nn")]
    Nn,
    #[serde(rename = "invnn")]
    InvNn,
    #[serde(rename = "invsoftmax")]
    InvSoftmax,
    #[serde(rename = "csls")]
    Csls,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Method::Nn => "nn",
            Method::InvNn => "invnn",
            Method::InvSoftmax => "invsoftmax",
            Method::Csls => "csls",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nn" => Ok(Method::Nn),
            "invnn" => Ok(Method::InvNn),
            "invsoftmax" => Ok(Method::InvSoftmax),
            "csls" => Ok(Method::Csls),
            other => Err(format!(
                "unknown method {other:?}, expected nn, invnn, invsoftmax or csls"
            )),
        }
    }
}

/// Method selection plus its knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignmentParams {
    pub method: Method,
    /// Neighborhood size for the csls penalties.
    pub csls_k: usize,
    /// Inverse temperature for invsoftmax.
    pub beta: f64,
    /// Keep only pairs whose method-score is at least this value.
    pub threshold: Option<f64>,
    /// Source rows processed per block.
    pub block_size: usize,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        Self {
            method: Method::Nn,
            csls_k: 10,
            beta: 30.0,
            threshold: None,
            block_size: 1024,
        }
    }
}

/// One chosen pair. The score lives on the method's own scale: cosine for
/// nn, negated rank for invnn, a probability for invsoftmax, the penalized
/// cosine for csls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentPair {
    pub src_idx: usize,
    pub tgt_idx: usize,
    pub score: f32,
    pub method: Method,
}

/// All pairs for one run, sorted by source index, at most one per source.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub pairs: Vec<AlignmentPair>,
    pub params: AlignmentParams,
    pub n_src: usize,
    pub n_tgt: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("target matrix has no rows")]
    EmptyTarget,
    #[error("dimension mismatch: source dim {src} vs target dim {tgt}")]
    DimensionMismatch { src: usize, tgt: usize },
    #[error("matrices must be unit-normalized before alignment")]
    UnnormalizedInput,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("k ({k}) exceeds the {rows} available {which} rows")]
    KExceedsRows {
        k: usize,
        rows: usize,
        which: &'static str,
    },
    #[error("beta must be positive, got {beta}")]
    InvalidBeta { beta: f64 },
    #[error("block_size must be at least 1")]
    InvalidBlockSize,
}

fn validate_matrices(src: &EmbeddingMatrix, tgt: &EmbeddingMatrix) -> Result<(), AlignError> {
    if src.dim() != tgt.dim() {
        return Err(AlignError::DimensionMismatch {
            src: src.dim(),
            tgt: tgt.dim(),
        });
    }
    if !src.is_normalized() || !tgt.is_normalized() {
        return Err(AlignError::UnnormalizedInput);
    }
    Ok(())
}

fn blocks(n: usize, block_size: usize) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + block_size).min(n);
        out.push(start..end);
        start = end;
    }
    out
}

/// Cosine similarities between source rows `rows` and every target row,
/// as a `rows.len() x tgt.n_rows()` row-major block. Inputs must be
/// unit-normalized, so entries are dot products in `[-1, 1]` up to
/// rounding.
pub fn cosine_block(
    src: &EmbeddingMatrix,
    rows: Range<usize>,
    tgt: &EmbeddingMatrix,
) -> Result<Vec<f64>, AlignError> {
    validate_matrices(src, tgt)?;
    let n_tgt = tgt.n_rows();
    let mut out = Vec::with_capacity(rows.len() * n_tgt);
    for i in rows {
        let a = src.row(i);
        for j in 0..n_tgt {
            out.push(dot(a, tgt.row(j)));
        }
    }
    Ok(out)
}

/// Walk the lowest-index argmax over one similarity row.
#[inline]
fn row_argmax(row: &[f64]) -> (usize, f64) {
    let mut best_j = 0;
    let mut best = f64::NEG_INFINITY;
    for (j, &s) in row.iter().enumerate() {
        if s > best {
            best = s;
            best_j = j;
        }
    }
    (best_j, best)
}

fn finish(
    choices: Vec<(usize, f64)>,
    params: &AlignmentParams,
    n_src: usize,
    n_tgt: usize,
) -> AlignmentResult {
    let pairs = choices
        .into_iter()
        .enumerate()
        .filter_map(|(src_idx, (tgt_idx, score))| {
            let score = score as f32;
            if let Some(t) = params.threshold {
                if (score as f64) < t {
                    return None;
                }
            }
            Some(AlignmentPair {
                src_idx,
                tgt_idx,
                score,
                method: params.method,
            })
        })
        .collect();
    AlignmentResult {
        pairs,
        params: params.clone(),
        n_src,
        n_tgt,
    }
}

fn validate_common(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    params: &AlignmentParams,
) -> Result<(), AlignError> {
    validate_matrices(src, tgt)?;
    if tgt.n_rows() == 0 {
        return Err(AlignError::EmptyTarget);
    }
    if params.block_size == 0 {
        return Err(AlignError::InvalidBlockSize);
    }
    Ok(())
}

/// Nearest neighbour: argmax of cosine, ties to the lowest target index.
pub fn align_nn(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    params: &AlignmentParams,
) -> Result<AlignmentResult, AlignError> {
    validate_common(src, tgt, params)?;
    let n_tgt = tgt.n_rows();
    let per_block: Vec<Vec<(usize, f64)>> = blocks(src.n_rows(), params.block_size)
        .into_par_iter()
        .map(|range| {
            let sims = cosine_block(src, range.clone(), tgt)?;
            Ok(sims.chunks_exact(n_tgt).map(row_argmax).collect())
        })
        .collect::<Result<_, AlignError>>()?;
    let choices: Vec<(usize, f64)> = per_block.into_iter().flatten().collect();
    Ok(finish(choices, params, src.n_rows(), n_tgt))
}

/// Inverted nearest neighbour. For source `i` and target `j`, the rank is
/// the number of sources strictly more similar to `j` than `i` is. The
/// chosen target minimizes the rank; rank ties go to the higher cosine,
/// then the lower index. The score is the negated rank.
pub fn align_invnn(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    params: &AlignmentParams,
) -> Result<AlignmentResult, AlignError> {
    validate_common(src, tgt, params)?;
    let n_src = src.n_rows();
    let n_tgt = tgt.n_rows();
    if n_src == 0 {
        return Ok(finish(Vec::new(), params, 0, n_tgt));
    }

    // Per target block, rank every source within each column, keeping the
    // best candidate per source. Blocks are merged in ascending target
    // order so remaining ties keep the lowest index.
    let per_block: Vec<Vec<(usize, f64, usize)>> = blocks(n_tgt, params.block_size)
        .into_par_iter()
        .map(|range| {
            let sims = cosine_block(tgt, range.clone(), src)?;
            let mut best: Vec<(usize, f64, usize)> =
                vec![(usize::MAX, f64::NEG_INFINITY, usize::MAX); n_src];
            for (local_j, col) in sims.chunks_exact(n_src).enumerate() {
                let j = range.start + local_j;
                let mut sorted: Vec<f64> = col.to_vec();
                sorted.sort_unstable_by(|a, b| b.total_cmp(a));
                for (i, &cos) in col.iter().enumerate() {
                    let rank = sorted.partition_point(|&x| x > cos);
                    let (best_rank, best_cos, _) = best[i];
                    if rank < best_rank || (rank == best_rank && cos > best_cos) {
                        best[i] = (rank, cos, j);
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_, AlignError>>()?;

    let mut best: Vec<(usize, f64, usize)> =
        vec![(usize::MAX, f64::NEG_INFINITY, usize::MAX); n_src];
    for block in per_block {
        for (i, cand) in block.into_iter().enumerate() {
            let (rank, cos, _) = cand;
            let (best_rank, best_cos, _) = best[i];
            if rank < best_rank || (rank == best_rank && cos > best_cos) {
                best[i] = cand;
            }
        }
    }
    let choices: Vec<(usize, f64)> = best
        .into_iter()
        .map(|(rank, _, j)| (j, -(rank as f64)))
        .collect();
    Ok(finish(choices, params, n_src, n_tgt))
}

/// Inverted softmax: the score of `(i, j)` is
/// `exp(beta cos_ij) / sum_i' exp(beta cos_i'j)`, normalized over sources
/// for the fixed target, computed through log-sum-exp.
pub fn align_invsoftmax(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    params: &AlignmentParams,
) -> Result<AlignmentResult, AlignError> {
    validate_common(src, tgt, params)?;
    if params.beta.is_nan() || params.beta <= 0.0 {
        return Err(AlignError::InvalidBeta { beta: params.beta });
    }
    let n_src = src.n_rows();
    let n_tgt = tgt.n_rows();
    if n_src == 0 {
        return Ok(finish(Vec::new(), params, 0, n_tgt));
    }
    let lse = log_sum_exp_per_target(src, tgt, params)?;

    let beta = params.beta;
    let per_block: Vec<Vec<(usize, f64)>> = blocks(n_src, params.block_size)
        .into_par_iter()
        .map(|range| {
            let sims = cosine_block(src, range.clone(), tgt)?;
            Ok(sims
                .chunks_exact(n_tgt)
                .map(|row| {
                    let mut best_j = 0;
                    let mut best = f64::NEG_INFINITY;
                    for (j, &s) in row.iter().enumerate() {
                        let log_score = beta * s - lse[j];
                        if log_score > best {
                            best = log_score;
                            best_j = j;
                        }
                    }
                    (best_j, best.exp())
                })
                .collect())
        })
        .collect::<Result<_, AlignError>>()?;
    let choices: Vec<(usize, f64)> = per_block.into_iter().flatten().collect();
    Ok(finish(choices, params, n_src, n_tgt))
}

/// `log sum_i exp(beta cos_ij)` for every target `j`.
fn log_sum_exp_per_target(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    params: &AlignmentParams,
) -> Result<Vec<f64>, AlignError> {
    let n_src = src.n_rows();
    let beta = params.beta;
    let per_block: Vec<Vec<f64>> = blocks(tgt.n_rows(), params.block_size)
        .into_par_iter()
        .map(|range| {
            let sims = cosine_block(tgt, range.clone(), src)?;
            Ok(sims
                .chunks_exact(n_src)
                .map(|col| {
                    let max = col.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(beta * s));
                    let sum: f64 = col.iter().map(|&s| (beta * s - max).exp()).sum();
                    max + sum.ln()
                })
                .collect())
        })
        .collect::<Result<_, AlignError>>()?;
    Ok(per_block.into_iter().flatten().collect())
}

/// Mean of the `k` largest cosines between each query row and the keys.
pub fn knn_mean_sim(
    queries: &EmbeddingMatrix,
    keys: &EmbeddingMatrix,
    k: usize,
    block_size: usize,
) -> Result<Vec<f64>, AlignError> {
    validate_matrices(queries, keys)?;
    if k == 0 {
        return Err(AlignError::InvalidK);
    }
    if k > keys.n_rows() {
        return Err(AlignError::KExceedsRows {
            k,
            rows: keys.n_rows(),
            which: "key",
        });
    }
    let block_size = block_size.max(1);
    let n_keys = keys.n_rows();
    let per_block: Vec<Vec<f64>> = blocks(queries.n_rows(), block_size)
        .into_par_iter()
        .map(|range| {
            let sims = cosine_block(queries, range.clone(), keys)?;
            Ok(sims
                .chunks_exact(n_keys)
                .map(|row| {
                    let mut scratch = row.to_vec();
                    if k < scratch.len() {
                        scratch.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
                        scratch.truncate(k);
                    }
                    // Summing in descending order keeps the result
                    // independent of the selection's internal order.
                    scratch.sort_unstable_by(|a, b| b.total_cmp(a));
                    scratch.iter().sum::<f64>() / k as f64
                })
                .collect())
        })
        .collect::<Result<_, AlignError>>()?;
    Ok(per_block.into_iter().flatten().collect())
}

/// Cross-domain similarity local scaling:
/// `score(i, j) = 2 cos_ij - rT(i) - rS(j)` with `rT`/`rS` the mean
/// similarity of each row to its `k` nearest rows on the other side.
pub fn align_csls(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    params: &AlignmentParams,
) -> Result<AlignmentResult, AlignError> {
    validate_common(src, tgt, params)?;
    if params.csls_k == 0 {
        return Err(AlignError::InvalidK);
    }
    if params.csls_k > tgt.n_rows() {
        return Err(AlignError::KExceedsRows {
            k: params.csls_k,
            rows: tgt.n_rows(),
            which: "target",
        });
    }
    if params.csls_k > src.n_rows() {
        return Err(AlignError::KExceedsRows {
            k: params.csls_k,
            rows: src.n_rows(),
            which: "source",
        });
    }
    let r_src = knn_mean_sim(src, tgt, params.csls_k, params.block_size)?;
    let r_tgt = knn_mean_sim(tgt, src, params.csls_k, params.block_size)?;

    let n_tgt = tgt.n_rows();
    let per_block: Vec<Vec<(usize, f64)>> = blocks(src.n_rows(), params.block_size)
        .into_par_iter()
        .map(|range| {
            let sims = cosine_block(src, range.clone(), tgt)?;
            Ok(range
                .clone()
                .zip(sims.chunks_exact(n_tgt))
                .map(|(i, row)| {
                    let mut best_j = 0;
                    let mut best = f64::NEG_INFINITY;
                    for (j, &s) in row.iter().enumerate() {
                        let score = 2.0 * s - r_src[i] - r_tgt[j];
                        if score > best {
                            best = score;
                            best_j = j;
                        }
                    }
                    (best_j, best)
                })
                .collect())
        })
        .collect::<Result<_, AlignError>>()?;
    let choices: Vec<(usize, f64)> = per_block.into_iter().flatten().collect();
    Ok(finish(choices, params, src.n_rows(), n_tgt))
}

/// Dispatch on the configured method.
pub fn align(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    params: &AlignmentParams,
) -> Result<AlignmentResult, AlignError> {
    match params.method {
        Method::Nn => align_nn(src, tgt, params),
        Method::InvNn => align_invnn(src, tgt, params),
        Method::InvSoftmax => align_invsoftmax(src, tgt, params),
        Method::Csls => align_csls(src, tgt, params),
    }
}

/// Full `n_src x n_tgt` score table for the configured method. Only
/// sensible for small inputs; used for diagnostics and property checks.
pub fn dense_scores(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    params: &AlignmentParams,
) -> Result<Vec<f64>, AlignError> {
    validate_common(src, tgt, params)?;
    let n_src = src.n_rows();
    let n_tgt = tgt.n_rows();
    let cosines = cosine_block(src, 0..n_src, tgt)?;
    match params.method {
        Method::Nn => Ok(cosines),
        Method::InvNn => {
            let mut out = vec![0.0; n_src * n_tgt];
            for j in 0..n_tgt {
                let mut col: Vec<f64> = (0..n_src).map(|i| cosines[i * n_tgt + j]).collect();
                col.sort_unstable_by(|a, b| b.total_cmp(a));
                for i in 0..n_src {
                    let rank = col.partition_point(|&x| x > cosines[i * n_tgt + j]);
                    out[i * n_tgt + j] = -(rank as f64);
                }
            }
            Ok(out)
        }
        Method::InvSoftmax => {
            if params.beta.is_nan() || params.beta <= 0.0 {
                return Err(AlignError::InvalidBeta { beta: params.beta });
            }
            let lse = log_sum_exp_per_target(src, tgt, params)?;
            Ok((0..n_src * n_tgt)
                .map(|idx| (params.beta * cosines[idx] - lse[idx % n_tgt]).exp())
                .collect())
        }
        Method::Csls => {
            if params.csls_k == 0 {
                return Err(AlignError::InvalidK);
            }
            if params.csls_k > n_tgt || params.csls_k > n_src {
                return Err(AlignError::KExceedsRows {
                    k: params.csls_k,
                    rows: n_tgt.min(n_src),
                    which: "cross-domain",
                });
            }
            let r_src = knn_mean_sim(src, tgt, params.csls_k, params.block_size)?;
            let r_tgt = knn_mean_sim(tgt, src, params.csls_k, params.block_size)?;
            Ok((0..n_src * n_tgt)
                .map(|idx| {
                    let (i, j) = (idx / n_tgt, idx % n_tgt);
                    2.0 * cosines[idx] - r_src[i] - r_tgt[j]
                })
                .collect())
        }
    }
}
