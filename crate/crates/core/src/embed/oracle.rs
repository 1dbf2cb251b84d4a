//! Ground-truth mock provider for end-to-end checks.
//!
//! Source item `i` and target item `i` share a hash-derived base vector;
//! the target side optionally adds seeded pseudo-Gaussian noise. With zero
//! noise the two sides are identical, so a correct aligner must recover
//! the identity pairing exactly, and raising the noise degrades retrieval
//! in a controlled way.

use sha2::{Digest, Sha256};

use super::batch::Side;
use super::hash::hash_embed;

/// Embedding for one side of synthetic pair `pair_id`. The base vector is
/// `hash_embed(pair_id as decimal text)`; the target side adds noise drawn
/// per coordinate from an Irwin-Hall approximation of a standard normal
/// (sum of 12 uniforms minus 6), scaled by `noise_sigma`. Only additions
/// of hash-derived uniforms are involved, so results are reproducible
/// across platforms. Returned vectors are NOT normalized.
pub fn oracle_embed(pair_id: u64, side: Side, noise_sigma: f64, dim: usize, seed: u64) -> Vec<f32> {
    let mut v = hash_embed(&pair_id.to_string(), dim, seed);
    if side == Side::Target && noise_sigma > 0.0 {
        let noise = noise_stream(pair_id, side, seed, dim);
        for (x, n) in v.iter_mut().zip(noise) {
            *x = (*x as f64 + noise_sigma * n) as f32;
        }
    }
    v
}

/// `dim` pseudo-Gaussian values derived from a domain-separated hash.
fn noise_stream(pair_id: u64, side: Side, seed: u64, dim: usize) -> Vec<f64> {
    let mut hasher = Sha256::new();
    hasher.update(b"oracle-noise");
    hasher.update(seed.to_le_bytes());
    hasher.update(pair_id.to_le_bytes());
    hasher.update([side as u8]);
    let base = hasher.finalize();

    let mut uniforms = Vec::with_capacity(dim * 12);
    let mut counter: u32 = 0;
    while uniforms.len() < dim * 12 {
        let mut block_hasher = Sha256::new();
        block_hasher.update(base);
        block_hasher.update(counter.to_le_bytes());
        let block = block_hasher.finalize();
        for group in block.chunks_exact(4) {
            let u = u32::from_le_bytes([group[0], group[1], group[2], group[3]]);
            uniforms.push(u as f64 / 4_294_967_296.0);
            if uniforms.len() == dim * 12 {
                break;
            }
        }
        counter += 1;
    }
    uniforms
        .chunks_exact(12)
        .map(|c| c.iter().sum::<f64>() - 6.0)
        .collect()
}

/// Parallel sentence texts for `n` synthetic pairs. The pair id is the
/// first digit run in each text, which is how the oracle provider
/// recovers it, and the two sides use distinct wording so their cache
/// keys never collide.
pub fn synthetic_pair_texts(n: usize) -> (Vec<String>, Vec<String>) {
    let src = (0..n)
        .map(|i| format!("source sentence {i} of the synthetic corpus"))
        .collect();
    let tgt = (0..n)
        .map(|i| format!("target sentence {i} of the synthetic corpus"))
        .collect();
    (src, tgt)
}

/// First maximal digit run in `text`, parsed as the pair id.
pub fn parse_pair_id(text: &str) -> Option<u64> {
    let start = text.find(|c: char| c.is_ascii_digit())?;
    let digits: String = text[start..]
        .chars()
        .take_while(|c| c.is_ascii_digit())
        .collect();
    digits.parse().ok()
}
