//! Keyed, counter-based random streams.
//!
//! Every random quantity in an estimation run is drawn from a [`Stream`] whose
//! key is derived from `(master_seed, replication, purpose, index)`. A stream
//! is a pure function of its key: the `c`-th output of a stream depends only on
//! the key and `c`, never on which other streams were consumed before it or on
//! which thread asked. This is what makes simulated objectives deterministic in
//! the parameter (common random numbers) and replications reproducible at any
//! thread count.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// What a stream is used for. Streams with different purposes never collide
/// even when replication and index coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamPurpose {
    /// Observed data paths generated by the harness.
    Data,
    /// Fixed variates behind the `j`-th simulated block.
    SimBlock,
    /// Integration points for the control-variate objective.
    TGrid,
    /// Argument draws for chf diagnostics.
    DiagnosticT,
    /// Reference samples for chf diagnostics.
    Reference,
    /// Anything else (tests, ad-hoc experiments).
    Auxiliary,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::Data => 0x01,
            StreamPurpose::SimBlock => 0x02,
            StreamPurpose::TGrid => 0x03,
            StreamPurpose::DiagnosticT => 0x04,
            StreamPurpose::Reference => 0x05,
            StreamPurpose::Auxiliary => 0x06,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub replication: u64,
    pub purpose: StreamPurpose,
    pub index: u64,
}

impl StreamKey {
    pub fn new(replication: u64, purpose: StreamPurpose, index: u64) -> Self {
        Self {
            replication,
            purpose,
            index,
        }
    }
}

/// Master seed from which all streams of a run are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedPlan {
    pub master_seed: u64,
}

impl SeedPlan {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn stream(&self, key: StreamKey) -> Stream {
        let mut k = mix64(self.master_seed ^ 0x5EED_0F5E_ED0F_5EED);
        k = mix64(k ^ mix64(key.replication.wrapping_add(GOLDEN)));
        k = mix64(k ^ mix64(key.purpose.tag().wrapping_mul(GOLDEN)));
        k = mix64(k ^ mix64(key.index.wrapping_add(0xD1B5_4A32_D192_ED03)));
        Stream { key: k, counter: 0 }
    }

    /// Shorthand for `stream(StreamKey::new(replication, purpose, index))`.
    pub fn stream_for(&self, replication: u64, purpose: StreamPurpose, index: u64) -> Stream {
        self.stream(StreamKey::new(replication, purpose, index))
    }
}

/// A counter-based generator: output `c` is `mix64(key + (c + 1) * GOLDEN)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    /// Number of 64-bit words consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// The `c`-th word of this stream, without advancing it.
    pub fn word_at(&self, c: u64) -> u64 {
        mix64(self.key.wrapping_add(c.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform on the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        let bits = self.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for Stream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let out = self.word_at(self.counter);
        self.counter = self.counter.wrapping_add(1);
        out
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
