//! Seedable random streams with independent substreams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a substream is used for inside one Monte Carlo trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    DesiredChannel = 0,
    InterfererChannel = 1,
    DesiredSymbols = 2,
    InterfererSymbols = 3,
    Noise = 4,
    InfoBits = 5,
    CodeConstruction = 6,
    Misc = 7,
}

/// Counter-based random stream (ChaCha8 keyed by the seed, one stream id per
/// substream). Draws from different stream ids never overlap.
#[derive(Clone, Debug)]
pub struct RandomStream {
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Substream for `(trial, purpose)`; independent of every other pair.
    pub fn substream(seed: u64, trial: u64, purpose: Purpose) -> Self {
        Self::with_stream(seed, (trial << 8) | purpose as u64)
    }
}

impl RngCore for RandomStream {
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
