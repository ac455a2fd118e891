//! Deterministic random substreams.
//!
//! Every stream is a ChaCha8 generator keyed by a SHA-256 digest of its
//! identifying parts, so a repetition's randomness depends only on what it
//! is, never on which thread runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

/// Stream for repetition `rep` at sample size `n` of the experiment `label`.
pub fn substream(master_seed: u64, label: &str, n: u64, rep: u64) -> Stream {
    let mut h = Sha256::new();
    h.update(b"lca-lab/stream/v1");
    h.update(master_seed.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(n.to_le_bytes());
    h.update(rep.to_le_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// A 64-bit seed derived from a parent seed and a label.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    use rand::RngCore;
    substream(seed, label, 0, 0).next_u64()
}
