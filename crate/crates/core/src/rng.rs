//! Counter-based, splittable random streams.
//!
//! A stream is keyed by `(master_seed, stream_id)` and positioned by a word
//! counter, so the emitted sequence is a pure function of those three
//! numbers. Ensembles hand stream `i` to orbit `i`, which makes results
//! independent of scheduling and worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    /// Stream whose id is derived from a path of indices, e.g.
    /// `(experiment, pair, init)`. Distinct paths give distinct ids with
    /// overwhelming probability.
    pub fn derived(master_seed: u64, path: &[u64]) -> Self {
        Self::new(master_seed, derive_stream_id(path))
    }

    /// Child stream of this one, keyed by `(self.stream_id, index)`.
    pub fn child(&self, index: u64) -> Self {
        Self::derived(self.master_seed, &[self.stream_id, index])
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn set_counter(&mut self, counter: u128) {
        self.inner.set_word_pos(counter);
    }

    /// A 64-bit seed for seeding another component.
    pub fn next_seed(&mut self) -> u64 {
        self.next_u64()
    }

    /// Uniform draw from `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        use rand::Rng;
        self.random()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn derive_stream_id(path: &[u64]) -> u64 {
    path.iter()
        .fold(0x6A09_E667_F3BC_C909, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
