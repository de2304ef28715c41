//! Counter-based random streams.
//!
//! Every Monte-Carlo block draws from its own ChaCha stream keyed by
//! `(seed, purpose)` with the block index as the stream number, so results
//! do not depend on how blocks are distributed over workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Data = 1,
    Noise = 2,
    Genie = 3,
}

const KEY_TAG: u64 = 0x706f_6c61_722d_6d63;

/// Independent generator for `(seed, block, purpose)`.
pub fn block_rng(seed: u64, block: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[16..24].copy_from_slice(&KEY_TAG.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(block);
    rng
}
