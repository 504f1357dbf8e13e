//! Splittable, counter-based random streams.
//!
//! A [`SeedStream`] names a position in a tree of independent streams. The
//! leaves are ChaCha8 keystreams: the key is derived from the root seed and the
//! 64-bit ChaCha stream id from the split path, so replicate `r` of a campaign
//! sees the same variates whichever thread runs it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    seed: u64,
    path: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, path: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream `index`. Children of distinct indices (and of distinct
    /// parents) are independent keystreams.
    pub fn split(&self, index: u64) -> Self {
        let path = splitmix64(self.path.rotate_left(17) ^ splitmix64(index ^ 0xD1B5_4A32_D192_ED03));
        Self {
            seed: self.seed,
            path,
        }
    }

    /// Child stream identified by a label, for separating roles inside one
    /// campaign (e.g. "statistic" versus "reference draws").
    pub fn split_named(&self, label: &str) -> Self {
        let h = label
            .bytes()
            .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01B3));
        self.split(h)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.seed;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.path);
        rng
    }
}

/// Uniform draw on the open interval (0, 1).
#[inline]
pub fn open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard exponential draw.
#[inline]
pub fn exp1<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    -open01(rng).ln()
}
