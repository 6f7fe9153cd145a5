//! Seeded random substreams.
//!
//! Every source of randomness in the pipeline is derived from one root seed
//! and a stream name, so stages can be rerun (or reordered) without
//! perturbing each other's draws. Stream names used by the pipeline:
//! `split`, `sampling/<thread>`, `optimizer`, `baseline`, `synth`,
//! `surrogate`.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Deterministic RNG for `(root_seed, name)`, stable across platforms.
pub fn substream(root_seed: u64, name: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(root_seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}
