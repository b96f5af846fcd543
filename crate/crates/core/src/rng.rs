//! Seeded substreams.
//!
//! Every random quantity is drawn from a ChaCha8 stream addressed by a key
//! (derived from the user seed and a path of child indices) and a 64-bit
//! stream number, usually the walk index. A walk therefore sees the same
//! numbers no matter which worker runs it or in which order.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::math;

/// SplitMix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A node in the tree of random streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
    key: [u64; 4],
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        let a = mix(seed);
        let b = mix(a ^ 0x5851_f42d_4c95_7f2d);
        let c = mix(b ^ 0x1405_7b7e_f767_814f);
        let d = mix(c ^ 0xda94_2042_e4dd_58b5);
        Streams { seed, key: [a, b, c, d] }
    }

    /// The user-facing seed this tree was rooted at.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent subtree number `index`.
    pub fn child(&self, index: u64) -> Streams {
        let mut key = [0u64; 4];
        let mut h = mix(index ^ 0xa076_1d64_78bd_642f);
        for (i, k) in key.iter_mut().enumerate() {
            h = mix(h ^ self.key[i]);
            *k = h;
        }
        Streams { seed: self.seed, key }
    }

    /// The generator for stream `index` under this key.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        for (i, k) in self.key.iter().enumerate() {
            bytes[i * 8..(i + 1) * 8].copy_from_slice(&k.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(index);
        rng
    }
}

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
pub fn uniform<R: rand_core::RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on the open interval `(0, 1)`.
#[inline]
pub fn uniform_open<R: rand_core::RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard exponential.
#[inline]
pub fn exponential<R: rand_core::RngCore + ?Sized>(rng: &mut R) -> f64 {
    -math::ln(uniform_open(rng))
}
