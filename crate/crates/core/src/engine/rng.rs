use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Stream reserved for the serial crossover phase.
pub const CROSSOVER_STREAM: u64 = u64::MAX;

/// Independent ChaCha stream `stream` of the generator keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// 64-bit seed from a tagged tuple of parts. Distinct inputs give distinct
/// seeds with overwhelming probability; parts are length-prefixed so
/// concatenation ambiguities cannot collide.
pub fn derive_seed(tag: &str, parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
