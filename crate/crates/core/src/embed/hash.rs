//! Hash-derived mock embeddings.
//!
//! Deterministic, dependency-free stand-in for a real embedding model,
//! used for offline runs and tests. The construction uses fixed-width
//! integer arithmetic only, so the output bytes are identical on every
//! platform.

use sha2::{Digest, Sha256};

/// Expand `sha256(seed || text)` in counter mode into `dim` floats in
/// `[-1, 1)`. Each 4-byte group is read as a little-endian u32 and mapped
/// through `u / 2^31 - 1`.
pub fn hash_embed(text: &str, dim: usize, seed: u64) -> Vec<f32> {
    assert!(dim >= 1, "dim must be positive");
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(text.as_bytes());
    let base = hasher.finalize();

    let mut out = Vec::with_capacity(dim);
    let mut counter: u32 = 0;
    'fill: loop {
        let mut block_hasher = Sha256::new();
        block_hasher.update(base);
        block_hasher.update(counter.to_le_bytes());
        let block = block_hasher.finalize();
        for group in block.chunks_exact(4) {
            let u = u32::from_le_bytes([group[0], group[1], group[2], group[3]]);
            out.push((u as f64 / 2_147_483_648.0 - 1.0) as f32);
            if out.len() == dim {
                break 'fill;
            }
        }
        counter += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_inputs_same_vector() {
        assert_eq!(hash_embed("a", 16, 42), hash_embed("a", 16, 42));
    }

    #[test]
    fn requested_dimension_is_honored() {
        assert_eq!(hash_embed("x", 768, 0).len(), 768);
        assert_eq!(hash_embed("x", 1, 0).len(), 1);
        assert_eq!(hash_embed("x", 9, 0).len(), 9);
    }

    #[test]
    fn distinct_texts_differ() {
        assert_ne!(hash_embed("a", 32, 42), hash_embed("b", 32, 42));
    }

    #[test]
    fn distinct_seeds_differ() {
        assert_ne!(hash_embed("a", 32, 1), hash_embed("a", 32, 2));
    }

    #[test]
    fn values_are_in_half_open_unit_interval() {
        for v in hash_embed("range check", 4096, 7) {
            assert!((-1.0..1.0).contains(&v), "{v} out of range");
        }
    }

    #[test]
    fn prefix_is_stable_across_dims() {
        // Counter-mode expansion means a longer vector extends a shorter one.
        let short = hash_embed("p", 8, 3);
        let long = hash_embed("p", 32, 3);
        assert_eq!(&long[..8], &short[..]);
    }

    #[test]
    fn golden_bit_patterns() {
        // Frozen outputs: a failure here means the construction no longer
        // produces identical bytes everywhere.
        let bits: Vec<u32> = hash_embed("a", 4, 42).iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits, vec![3171756748, 1062425996, 1046338655, 1063588822]);
        let bits: Vec<u32> = hash_embed("portability probe", 3, 7)
            .iter()
            .map(|v| v.to_bits())
            .collect();
        assert_eq!(bits, vec![3201571452, 3210274966, 3206965924]);
    }
}
