//! Seeded randomness. Every random choice in the toolkit draws from a
//! generator derived here from the run seed and a label naming the stream.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator for the stream named by `labels` under `seed`.
pub fn stream_rng(seed: u64, labels: &[&str]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for l in labels {
        h.update((l.len() as u64).to_le_bytes());
        h.update(l.as_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// A uniformly shuffled `0..n`.
pub fn permutation(n: usize, seed: u64, labels: &[&str]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, labels));
    order
}
