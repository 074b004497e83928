//! Sources of the bits placed on not-completely-polarized positions.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::polar::Layer;

/// Chooses a bit for an unpolarized position given `p1 = P(u_i = 1 | past)`.
pub trait BitSampler {
    fn sample(&mut self, block: usize, layer: Layer, index: usize, p1: f64) -> u8;
}

/// Shared randomness keyed by `(block, layer, index)`.
///
/// Position `i` of block `t`, layer `l` reads the `i`-th 64-bit word of
/// ChaCha8 stream `4 t + l` under `seed`, so encoder and decoders agree
/// without any shared state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommonRandomness {
    seed: u64,
}

impl CommonRandomness {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn uniform(&self, block: usize, layer: Layer, index: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block as u64 * 4 + layer.index() as u64);
        rng.set_word_pos(2 * index as u128);
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl BitSampler for CommonRandomness {
    fn sample(&mut self, block: usize, layer: Layer, index: usize, p1: f64) -> u8 {
        (self.uniform(block, layer, index) < p1) as u8
    }
}

/// Fresh draws from a caller-owned generator, for ensemble sampling.
pub struct FreshRandomness<R> {
    pub rng: R,
}

impl<R: Rng> BitSampler for FreshRandomness<R> {
    fn sample(&mut self, _block: usize, _layer: Layer, _index: usize, p1: f64) -> u8 {
        (self.rng.gen::<f64>() < p1) as u8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_position_matches_sequential_reads() {
        let cr = CommonRandomness::new(77);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        rng.set_stream(2 * 4 + 1);
        for i in 0..40 {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            assert_eq!(cr.uniform(2, Layer::V, i), u);
        }
    }

    #[test]
    fn keys_are_independent_streams() {
        let cr = CommonRandomness::new(5);
        assert_ne!(cr.uniform(0, Layer::W, 3), cr.uniform(0, Layer::V, 3));
        assert_ne!(cr.uniform(0, Layer::W, 3), cr.uniform(1, Layer::W, 3));
    }
}
