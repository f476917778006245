//! Named, splittable seeds.
//!
//! Every stochastic operation in the crate takes a [`Seed`]. Sub-streams are
//! derived by mixing a label or an index into the parent seed, so two
//! experiments that share a master seed replay bit-identically and unrelated
//! consumers never share a stream. The generator behind a seed is ChaCha8,
//! which is counter based.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Seed {
    /// Derives the sub-stream called `name`.
    pub fn stream(self, name: &str) -> Seed {
        // FNV-1a over the label, then mixed with the parent.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in name.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        Seed(splitmix64(self.0 ^ splitmix64(h)))
    }

    /// Derives the `i`-th child of this seed.
    pub fn index(self, i: u64) -> Seed {
        Seed(splitmix64(splitmix64(self.0).wrapping_add(i.wrapping_mul(0xd6e8_feb8_6659_fd93))))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}
