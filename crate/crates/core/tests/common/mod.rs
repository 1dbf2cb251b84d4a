//! Shared helpers for integration tests: an independent dense reference
//! implementation of every retrieval criterion, plus matrix builders.
//!
//! The reference works on a fully materialized cosine table and follows
//! the method definitions directly. It deliberately shares no code with
//! the blockwise engine it is used to check.

#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use embalign_core::embed::{hash_embed, Clock, EmbeddingProvider, ProviderError};
use embalign_core::matrix::EmbeddingMatrix;
use embalign_core::rng::SplitMix64;

/// Wraps a provider, counting requests and logging (time, texts) events
/// against the supplied clock.
pub struct RecordingProvider<'a, P> {
    inner: P,
    clock: &'a dyn Clock,
    calls: AtomicUsize,
    events: Mutex<Vec<(Duration, usize)>>,
}

impl<'a, P> RecordingProvider<'a, P> {
    pub fn new(inner: P, clock: &'a dyn Clock) -> Self {
        Self {
            inner,
            clock,
            calls: AtomicUsize::new(0),
            events: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn events(&self) -> Vec<(Duration, usize)> {
        self.events.lock().unwrap().clone()
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for RecordingProvider<'_, P> {
    fn model_id(&self) -> &str {
        self.inner.model_id()
    }
    fn input_type(&self) -> &str {
        self.inner.input_type()
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.events
            .lock()
            .unwrap()
            .push((self.clock.now(), texts.len()));
        self.inner.embed_batch(texts)
    }
}

/// Unit-normalized matrix with hash-derived pseudo-random rows.
pub fn random_unit_matrix(n: usize, dim: usize, tag: &str, seed: u64) -> EmbeddingMatrix {
    let rows: Vec<Vec<f32>> = (0..n)
        .map(|i| hash_embed(&format!("{tag} {i}"), dim, seed))
        .collect();
    EmbeddingMatrix::from_rows(dim, &rows)
        .unwrap()
        .normalize_rows()
        .unwrap()
}

/// Dense cosine table, `table[i][j] = cos(src_i, tgt_j)`, f64 accumulation.
pub fn cosine_table(src: &EmbeddingMatrix, tgt: &EmbeddingMatrix) -> Vec<Vec<f64>> {
    (0..src.n_rows())
        .map(|i| {
            (0..tgt.n_rows())
                .map(|j| {
                    src.row(i)
                        .iter()
                        .zip(tgt.row(j))
                        .map(|(&a, &b)| a as f64 * b as f64)
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// A reference choice: target index and method-scale score.
pub type RefChoice = (usize, f64);

/// Plain nearest neighbour, ties to the lowest index.
pub fn reference_nn(table: &[Vec<f64>]) -> Vec<RefChoice> {
    table
        .iter()
        .map(|row| {
            let mut best = (0usize, f64::NEG_INFINITY);
            for (j, &s) in row.iter().enumerate() {
                if s > best.1 {
                    best = (j, s);
                }
            }
            best
        })
        .collect()
}

/// Inverted nearest neighbour: per (i, j), count sources strictly more
/// similar to j; pick the j with the smallest count, ranks tied by higher
/// cosine then lower index. Score is the negated rank.
pub fn reference_invnn(table: &[Vec<f64>]) -> Vec<RefChoice> {
    let n_src = table.len();
    let n_tgt = table[0].len();
    (0..n_src)
        .map(|i| {
            let mut best_rank = usize::MAX;
            let mut best_cos = f64::NEG_INFINITY;
            let mut best_j = usize::MAX;
            for (j, &mine) in table[i].iter().enumerate().take(n_tgt) {
                let rank = (0..n_src).filter(|&other| table[other][j] > mine).count();
                if rank < best_rank || (rank == best_rank && mine > best_cos) {
                    best_rank = rank;
                    best_cos = mine;
                    best_j = j;
                }
            }
            (best_j, -(best_rank as f64))
        })
        .collect()
}

/// Inverted softmax: normalize `exp(beta cos)` over sources for each
/// fixed target, stabilized with log-sum-exp. Ties to the lowest index.
pub fn reference_invsoftmax(table: &[Vec<f64>], beta: f64) -> Vec<RefChoice> {
    let n_src = table.len();
    let n_tgt = table[0].len();
    let lse: Vec<f64> = (0..n_tgt)
        .map(|j| {
            let max = (0..n_src).fold(f64::NEG_INFINITY, |m, i| m.max(beta * table[i][j]));
            let sum: f64 = (0..n_src).map(|i| (beta * table[i][j] - max).exp()).sum();
            max + sum.ln()
        })
        .collect();
    (0..n_src)
        .map(|i| {
            let mut best = (0usize, f64::NEG_INFINITY);
            for j in 0..n_tgt {
                let log_score = beta * table[i][j] - lse[j];
                if log_score > best.1 {
                    best = (j, log_score);
                }
            }
            (best.0, best.1.exp())
        })
        .collect()
}

/// Mean of the `k` largest values in a slice.
pub fn reference_topk_mean(values: &[f64], k: usize) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    sorted.truncate(k);
    sorted.iter().sum::<f64>() / k as f64
}

/// CSLS: `2 cos - rT(i) - rS(j)` with top-k mean penalties on both sides.
pub fn reference_csls(table: &[Vec<f64>], k: usize) -> Vec<RefChoice> {
    let n_src = table.len();
    let n_tgt = table[0].len();
    let r_src: Vec<f64> = table
        .iter()
        .map(|row| reference_topk_mean(row, k))
        .collect();
    let r_tgt: Vec<f64> = (0..n_tgt)
        .map(|j| {
            let col: Vec<f64> = (0..n_src).map(|i| table[i][j]).collect();
            reference_topk_mean(&col, k)
        })
        .collect();
    (0..n_src)
        .map(|i| {
            let mut best = (0usize, f64::NEG_INFINITY);
            for j in 0..n_tgt {
                let score = 2.0 * table[i][j] - r_src[i] - r_tgt[j];
                if score > best.1 {
                    best = (j, score);
                }
            }
            best
        })
        .collect()
}

/// Convenience bundle for randomized comparisons.
pub struct RandomInstance {
    pub src: EmbeddingMatrix,
    pub tgt: EmbeddingMatrix,
    pub k: usize,
}

/// Deterministic random instance with `n_src, n_tgt <= max_n` and
/// `dim <= max_dim`.
pub fn random_instance(rng: &mut SplitMix64, max_n: usize, max_dim: usize) -> RandomInstance {
    let n_src = 1 + rng.below(max_n as u64) as usize;
    let n_tgt = 1 + rng.below(max_n as u64) as usize;
    let dim = 1 + rng.below(max_dim as u64) as usize;
    let seed = rng.next_u64();
    let k = 1 + rng.below(n_src.min(n_tgt) as u64) as usize;
    RandomInstance {
        src: random_unit_matrix(n_src, dim, "src", seed),
        tgt: random_unit_matrix(n_tgt, dim, "tgt", seed ^ 0xDEAD_BEEF),
        k,
    }
}
