use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random stream keyed by `(seed, stream id)`.
///
/// Distinct stream ids under the same seed give independent ChaCha streams,
/// so work split across threads stays reproducible no matter how it is
/// scheduled.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Factory for the streams of one run.
///
/// Stream ids are structured as `(tag, index, chunk)` so nested parallel loops
/// (rotation `j`, worker chunk `c`) never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, id: u64) -> StreamRng {
        StreamRng::new(self.seed, id)
    }

    /// Stream `(tag, index, chunk)`; tag < 2¹⁶, index < 2²⁴, chunk < 2²⁴.
    pub fn keyed(&self, tag: u64, index: u64, chunk: u64) -> StreamRng {
        debug_assert!(tag < 1 << 16 && index < 1 << 24 && chunk < 1 << 24);
        self.stream((tag << 48) | (index << 24) | chunk)
    }
}
