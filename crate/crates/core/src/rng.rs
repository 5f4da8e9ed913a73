//! Seeded, splittable random streams.
//!
//! A [`RandomStream`] is a 256-bit key. Child streams are derived from
//! `(tag, index)` by hashing, so the numbers a kernel or selection step sees
//! depend only on the master seed and its own coordinates, never on which
//! thread ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    key: [u64; 4],
}

impl RandomStream {
    pub fn new(master_seed: u64) -> Self {
        let mut key = [0u64; 4];
        let mut state = master_seed;
        for word in &mut key {
            state = splitmix64(state);
            *word = state;
        }
        Self { key }
    }

    /// Child stream for `(tag, index)`.
    pub fn derive(&self, tag: &str, index: u64) -> Self {
        let mut h = self.key[0] ^ self.key[1].rotate_left(17);
        for &b in tag.as_bytes() {
            h = splitmix64(h ^ u64::from(b));
        }
        // length separates "ab"+"c" from "a"+"bc"-style collisions on the index
        h = splitmix64(h ^ (tag.len() as u64).wrapping_mul(GOLDEN));
        h = splitmix64(h ^ index);
        let mut key = [0u64; 4];
        for (k, word) in key.iter_mut().enumerate() {
            *word = splitmix64(h ^ self.key[k].wrapping_add((k as u64 + 1).wrapping_mul(GOLDEN)));
        }
        Self { key }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        for (chunk, word) in seed.chunks_exact_mut(8).zip(self.key.iter()) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

/// Convenience form of [`RandomStream::derive`].
pub fn derive_stream(master: &RandomStream, tag: &str, index: u64) -> RandomStream {
    master.derive(tag, index)
}
