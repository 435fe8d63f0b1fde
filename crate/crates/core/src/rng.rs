//! Deterministic random streams.
//!
//! Everything random in this crate flows from a single `u64` seed through
//! named substreams, so runs are reproducible bit-for-bit across platforms.
//! The generator is the splitmix64 finalizer; entry-addressable access (used
//! by [`crate::network::BinaryNetwork`] in seeded form) hashes the entry
//! coordinates instead of advancing a stream.

/// splitmix64 step: full-avalanche 64-bit mixer.
#[inline]
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derives an independent substream seed from a parent seed and a label.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = splitmix64(seed);
    for byte in label.bytes() {
        h = splitmix64(h ^ u64::from(byte));
    }
    h
}

/// Derives a per-index seed (Monte-Carlo trials, resampling attempts).
pub fn derive_indexed_seed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive_seed(seed, label) ^ index)
}

/// Uniform ±1 sign addressed by (layer, row, col); the backing store of
/// seeded binary networks.
#[inline]
pub fn entry_sign(seed: u64, layer: usize, row: usize, col: usize) -> i8 {
    let mut h = splitmix64(seed.wrapping_add(layer as u64));
    h = splitmix64(h ^ row as u64);
    h = splitmix64(h ^ col as u64);
    if h & 1 == 1 {
        1
    } else {
        -1
    }
}

/// Sequential stream of pseudo-random values.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream {
            state: splitmix64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in (lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller (one value per call; no cached spare,
    /// which keeps the stream position a pure function of the call count).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
