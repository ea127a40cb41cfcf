//! Deterministic seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! root seed and a stream number (trial index, stream step, ...), so runs of
//! different lengths share prefixes and trials can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for stream `stream` under `root`.
pub fn stream_rng(root: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 mix of `(root, salt)`, for deriving independent root seeds.
pub fn derive_seed(root: u64, salt: u64) -> u64 {
    let mut z = root ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
