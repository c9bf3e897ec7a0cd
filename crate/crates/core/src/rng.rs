//! Deterministic RNG stream derivation.
//!
//! Every stage of the pipeline draws randomness from named substreams of a
//! single user-facing seed. A substream is identified by `(seed, domain,
//! index)` and hashed into a ChaCha key, so parallel and serial evaluation
//! of the same work items consume identical streams regardless of schedule.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Derive an independent RNG stream for `(seed, domain, index)`.
pub fn derive_stream(seed: u64, domain: &str, index: u64) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0x1f]);
    hasher.update(domain.as_bytes());
    hasher.update([0x1f]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}
