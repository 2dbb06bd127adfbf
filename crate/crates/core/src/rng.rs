//! Seeded randomness with exact raw-bit accounting.
//!
//! The generator is ChaCha8 (`rand_chacha`), keyed by the 64-bit seed and
//! selecting its 64-bit stream by `stream_id`. Draws use rejection sampling on
//! `ceil(log2 m)`-bit blocks pulled from a bit buffer, and every pulled bit is
//! counted, rejected blocks included.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Source of `uniform_index` outcomes for the local search.
pub trait DrawSource {
    fn uniform_index(&mut self, m: u32) -> Result<u32>;
}

/// Number of bits needed to write any value in `[0, m)`.
pub fn index_bits(m: u64) -> u32 {
    if m <= 1 {
        0
    } else {
        64 - (m - 1).leading_zeros()
    }
}

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream_id: u64,
    bits_consumed: u64,
    inner: ChaCha8Rng,
    buffer: u64,
    buffered: u32,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        SeededRng {
            seed,
            stream_id,
            bits_consumed: 0,
            inner,
            buffer: 0,
            buffered: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn bits_consumed(&self) -> u64 {
        self.bits_consumed
    }

    /// Independent stream determined by `(seed, stream_id, child_id)`. The
    /// parent is not advanced.
    pub fn fork(&self, child_id: u64) -> SeededRng {
        let stream = mix64(self.stream_id ^ mix64(child_id.wrapping_add(0x5bd1_e995)));
        SeededRng::with_stream(self.seed, stream)
    }

    fn take_bits(&mut self, k: u32) -> u64 {
        debug_assert!(k > 0 && k <= 32);
        if self.buffered < k {
            // Top up: keep the leftover low bits, append a fresh word above them.
            let fresh = self.inner.next_u64();
            let need = k - self.buffered;
            let value = self.buffer | ((fresh & ((1u64 << need) - 1)) << self.buffered);
            self.buffer = fresh >> need;
            self.buffered = 64 - need;
            self.bits_consumed += u64::from(k);
            return value;
        }
        let value = self.buffer & ((1u64 << k) - 1);
        self.buffer >>= k;
        self.buffered -= k;
        self.bits_consumed += u64::from(k);
        value
    }
}

impl DrawSource for SeededRng {
    fn uniform_index(&mut self, m: u32) -> Result<u32> {
        if m == 0 {
            return Err(Error::InvalidRange);
        }
        let k = index_bits(u64::from(m));
        if k == 0 {
            return Ok(0);
        }
        loop {
            let x = self.take_bits(k);
            if x < u64::from(m) {
                return Ok(x as u32);
            }
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One `uniform_index` call: the range and the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Draw {
    pub modulus: u32,
    pub value: u32,
}

/// Replays a recorded or recovered draw sequence, checking each range.
#[derive(Debug, Clone)]
pub struct ScriptedDraws {
    draws: Vec<Draw>,
    next: usize,
}

impl ScriptedDraws {
    pub fn new(draws: Vec<Draw>) -> Self {
        ScriptedDraws { draws, next: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.draws.len() - self.next
    }
}

impl DrawSource for ScriptedDraws {
    fn uniform_index(&mut self, m: u32) -> Result<u32> {
        let draw = self.draws.get(self.next).copied().ok_or_else(|| {
            Error::ReplayMismatch(format!("script exhausted after {} draws", self.next))
        })?;
        if draw.modulus != m {
            return Err(Error::ReplayMismatch(format!(
                "draw {} expected range {}, engine asked for {}",
                self.next, draw.modulus, m
            )));
        }
        self.next += 1;
        Ok(draw.value)
    }
}

/// Draw source owned by an engine.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Draws {
    Seeded(SeededRng),
    Scripted(ScriptedDraws),
}

impl Draws {
    pub fn bits_consumed(&self) -> u64 {
        match self {
            Draws::Seeded(rng) => rng.bits_consumed(),
            Draws::Scripted(_) => 0,
        }
    }
}

impl DrawSource for Draws {
    fn uniform_index(&mut self, m: u32) -> Result<u32> {
        match self {
            Draws::Seeded(rng) => rng.uniform_index(m),
            Draws::Scripted(script) => script.uniform_index(m),
        }
    }
}
