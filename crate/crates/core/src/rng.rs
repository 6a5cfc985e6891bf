//! Seeded, splittable random streams.
//!
//! A [`SeededRng`] is a ChaCha8 generator keyed by a 64-bit master seed and
//! positioned on a 64-bit stream index. Parallel work never shares a
//! generator: a caller [`fork`](SeededRng::fork)s a [`StreamFamily`] and each
//! work item (a matrix column, a Monte-Carlo trial) opens its own stream by
//! index. Output therefore depends only on the seed and the index schedule,
//! never on the thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct SeededRng {
    master: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(master: u64) -> Self {
        Self::with_stream(master, 0)
    }

    pub fn with_stream(master: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master);
        inner.set_stream(stream);
        Self {
            master,
            stream,
            inner,
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Draws a fresh family key from this stream.
    pub fn fork(&mut self) -> StreamFamily {
        StreamFamily {
            key: self.inner.next_u64(),
        }
    }
}

impl RngCore for SeededRng {
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

/// A keyed family of independent streams, indexed by work item.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamFamily {
    key: u64,
}

impl StreamFamily {
    pub fn from_key(key: u64) -> Self {
        Self { key }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn stream(&self, index: u64) -> SeededRng {
        SeededRng::with_stream(self.key, index)
    }
}
