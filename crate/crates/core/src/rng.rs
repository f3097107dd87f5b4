//! Deterministic randomness streams.
//!
//! Every randomized routine takes a caller-owned generator. Independent
//! trials, seeds and grid points obtain their generator from an
//! [`RngStream`] keyed by `(master_seed, stream_index)`, so results do not
//! depend on scheduling when work is spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator type handed out by [`RngStream::rng`].
pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A stream derived from this one, for nested work (e.g. seed -> grid point -> trial).
    ///
    /// The child's master seed mixes both coordinates of the parent, so
    /// `a.child(i)` and `b.child(i)` are unrelated whenever `a != b`.
    pub fn child(&self, index: u64) -> RngStream {
        let mixed = splitmix64(self.master_seed ^ splitmix64(self.stream_index.wrapping_add(0x9e37)));
        RngStream::new(mixed, index)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
