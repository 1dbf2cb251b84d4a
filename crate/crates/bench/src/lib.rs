//! Fixture builders shared by the benchmarks.

use embalign_core::embed::hash_embed;
use embalign_core::matrix::EmbeddingMatrix;

/// Unit-normalized matrix of hash-derived pseudo-random rows.
pub fn random_unit_matrix(n: usize, dim: usize, seed: u64) -> EmbeddingMatrix {
    let rows: Vec<Vec<f32>> = (0..n)
        .map(|i| hash_embed(&format!("bench row {i}"), dim, seed))
        .collect();
    EmbeddingMatrix::from_rows(dim, &rows)
        .unwrap()
        .normalize_rows()
        .unwrap()
}

/// Synthetic sentences of roughly realistic length.
pub fn sentences(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| format!("benchmark sentence number {i} with a handful of filler words attached"))
        .collect()
}
