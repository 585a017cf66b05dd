//! Splittable deterministic RNG streams.
//!
//! Every random draw in the crate comes from a stream named by a master seed
//! plus a path of string labels, so any sample or run can be regenerated in
//! isolation and concurrent runs cannot perturb each other.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Deterministic RNG for the stream identified by `(seed, path...)`.
pub fn stream(seed: u64, path: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(digest(seed, path))
}

/// Derives a 64-bit sub-seed for the same stream space.
pub fn derive_seed(seed: u64, path: &[&str]) -> u64 {
    let d = digest(seed, path);
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

fn digest(seed: u64, path: &[&str]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for part in path {
        hasher.update([0x1f]); // separator, keeps ["ab","c"] != ["a","bc"]
        hasher.update(part.as_bytes());
    }
    hasher.finalize().into()
}
