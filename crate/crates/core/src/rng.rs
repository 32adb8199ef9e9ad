//! Seeded SplitMix64 generator and a stable byte hash.
//!
//! Extraction and training must be bit-reproducible across runs and
//! platforms, so we carry our own tiny generator instead of pulling in
//! a crate whose stream might change between versions.

use alloc::vec::Vec;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 stream: 64-bit state advanced by the golden-ratio
/// increment, output mixed with the standard finalizer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..n` via rejection sampling (unbiased).
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "next_below(0)");
        loop {
            let x = self.next_u64();
            let r = x % n;
            // Accept unless x falls in the truncated final block of the
            // 2^64 range, which would over-weight small residues.
            if x.wrapping_sub(r) <= u64::MAX - (n - 1) {
                return r;
            }
        }
    }

    /// One uniform bit.
    pub fn next_bit(&mut self) -> bool {
        self.next_below(2) == 1
    }

    /// Uniform f64 in [0, 1), using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / ((1u64 << 53) as f64))
    }

    /// Uniform f64 in [lo, hi).
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// First `k` elements of a Fisher-Yates partial shuffle: a uniform
    /// sample of `k` items without replacement, in draw order.
    pub fn sample_without_replacement<T: Copy>(&mut self, pool: &[T], k: usize) -> Vec<T> {
        assert!(k <= pool.len());
        let mut items: Vec<T> = pool.to_vec();
        for i in 0..k {
            let j = i + self.next_below((items.len() - i) as u64) as usize;
            items.swap(i, j);
        }
        items.truncate(k);
        items
    }
}

/// FNV-1a over a byte slice. Used wherever a stable, platform-independent
/// hash is needed (per-paragraph seeds, held-out assignment).
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derives an independent stream seed from a base seed and a sequence of
/// labelled parts. Parts are length-prefixed so distinct part lists
/// cannot collide by concatenation.
pub fn derive_seed(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut buf = Vec::with_capacity(16 + parts.iter().map(|p| p.len() + 8).sum::<usize>());
    buf.extend_from_slice(&seed.to_le_bytes());
    for part in parts {
        buf.extend_from_slice(&(part.len() as u64).to_le_bytes());
        buf.extend_from_slice(part);
    }
    fnv1a64(&buf)
}
