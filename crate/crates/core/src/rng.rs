//! Splittable, counter-keyed random streams.
//!
//! Every particle owns the stream `(seed, particle index)`; each time step
//! derives a fresh generator from that key, so the variates a particle sees
//! never depend on how particles are distributed over workers.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; a bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Same stream id under a derived seed; used to key one stream per time step.
    #[inline]
    pub fn substream(&self, tag: u64) -> RngStream {
        RngStream {
            seed: mix64(self.seed.wrapping_add(tag.wrapping_add(1).wrapping_mul(GOLDEN))),
            stream: self.stream,
        }
    }

    /// Generator positioned at draw index 0 of this stream.
    #[inline]
    pub fn rng(&self) -> StreamRng {
        // (a, b) determines (seed, stream) uniquely, so distinct keys never share a state.
        let a = mix64(self.seed ^ 0x6A09_E667_F3BC_C908);
        let b = mix64(self.stream ^ a);
        let c = mix64(b ^ 0xBB67_AE85_84CA_A73B);
        let d = mix64(c ^ a ^ 0x3C6E_F372_FE94_F82B);
        let mut bytes = [0u8; 32];
        for (chunk, word) in bytes.chunks_exact_mut(8).zip([a, b, c, d]) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        StreamRng::from_seed(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn identical_keys_give_identical_draws() {
        let a: Vec<u64> = {
            let mut r = RngStream::new(7, 3).rng();
            (0..16).map(|_| r.random()).collect()
        };
        let b: Vec<u64> = {
            let mut r = RngStream::new(7, 3).rng();
            (0..16).map(|_| r.random()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn neighbouring_streams_differ() {
        let x: u64 = RngStream::new(7, 3).rng().random();
        let y: u64 = RngStream::new(7, 4).rng().random();
        let z: u64 = RngStream::new(8, 3).rng().random();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn substreams_are_keyed_by_tag() {
        let s = RngStream::new(1, 10);
        assert_eq!(s.substream(5), s.substream(5));
        assert_ne!(s.substream(5), s.substream(6));
        assert_eq!(s.substream(5).stream(), 10);
    }

    #[test]
    fn uniform_mean_is_one_half() {
        let mut r = RngStream::new(42, 0).rng();
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| r.random::<f64>()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 4.0 * (1.0f64 / 12.0 / n as f64).sqrt());
    }
}
