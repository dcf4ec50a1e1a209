//! Counter-addressed random streams.
//!
//! A stream is named by a master seed and a path of integers, e.g.
//! `(trial, factor)`. The path is folded into a 64-bit stream selector for a
//! ChaCha8 keystream keyed by the master seed, so any stream can be
//! materialized independently of every other one and of evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    master_seed: u64,
    selector: u64,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed, selector: splitmix64(0x5453_445f_524f_4f54) }
    }

    /// Stream addressed by `path` under `master_seed`.
    pub fn at(master_seed: u64, path: &[u64]) -> Self {
        path.iter().fold(Self::new(master_seed), |s, &i| s.child(i))
    }

    /// Sub-stream `index` of this stream.
    pub fn child(&self, index: u64) -> Self {
        let mixed = splitmix64(self.selector ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        Self { master_seed: self.master_seed, selector: mixed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.selector);
        rng
    }

    pub fn normals(&self) -> impl Iterator<Item = f64> {
        let mut rng = self.rng();
        std::iter::repeat_with(move || StandardNormal.sample(&mut rng))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
