//! Brute-force bit-channel statistics for short blocks.
//!
//! Every context sequence, observation sequence and layer sequence is
//! enumerated, so the cost grows like `(2 * 2 * |Y|)^N`. This is a reference
//! for the Monte Carlo estimator, not a construction tool.

use std::collections::BTreeMap;

use crate::channel::BroadcastChannel;
use crate::error::{Error, Result};
use crate::prob::LayeredDistribution;

use super::model::{Layer, LayerTables};
use super::stats::{BitChannelStats, Estimation, LayerStats};
use super::transform::polar_transform_word;

/// Largest exponent the oracle accepts.
pub const MAX_EXACT_N: u32 = 3;

/// Exact `Z` and conditional entropy of every bit-channel of all three layers.
pub fn exact_layer_stats(
    layered: &LayeredDistribution,
    ch: &BroadcastChannel,
    n: u32,
) -> Result<LayerStats> {
    Ok([
        exact_single_layer(Layer::W, layered, ch, n)?,
        exact_single_layer(Layer::V, layered, ch, n)?,
        exact_single_layer(Layer::X, layered, ch, n)?,
    ])
}

pub fn exact_single_layer(
    layer: Layer,
    layered: &LayeredDistribution,
    ch: &BroadcastChannel,
    n: u32,
) -> Result<BitChannelStats> {
    if n > MAX_EXACT_N {
        return Err(Error::OracleTooLarge(n, MAX_EXACT_N));
    }
    let ctx = context_law(layer, layered);
    let source = LayerTables::source(layer, layered);
    let (z_source, h_source) = enumerate(n, &ctx, &source, 1);
    let mut z_receiver = BTreeMap::new();
    let mut h_receiver = BTreeMap::new();
    for &j in layer.receivers() {
        let t = LayerTables::with_receiver(layer, layered, ch, j);
        let (z, h) = enumerate(n, &ctx, &t, ch.y_size(j));
        z_receiver.insert(j, z);
        h_receiver.insert(j, h);
    }
    Ok(BitChannelStats {
        layer,
        z_source,
        z_receiver,
        estimation: Estimation::Exact,
        sample_count: 0,
        se_source: Vec::new(),
        se_receiver: BTreeMap::new(),
        h_source,
        h_receiver,
    })
}

/// Marginal law of the context symbol (nothing, `W` or `V`).
fn context_law(layer: Layer, layered: &LayeredDistribution) -> [f64; 2] {
    match layer {
        Layer::W => [1.0, 0.0],
        Layer::V => [layered.pw.p(0), layered.pw.p(1)],
        Layer::X => layered.pv(),
    }
}

fn digit(mut v: usize, base: usize, pos: usize) -> usize {
    for _ in 0..pos {
        v /= base;
    }
    v % base
}

fn enumerate(n: u32, ctx: &[f64; 2], t: &LayerTables, ny: usize) -> (Vec<f64>, Vec<f64>) {
    let len = 1usize << n;
    let n_ctx: usize = if ctx[1] > 0.0 { 1 << len } else { 1 };
    let n_obs = ny.pow(len as u32);
    let words = 1usize << len;
    let tw: Vec<usize> = (0..words)
        .map(|b| polar_transform_word(b as u64, n) as usize)
        .collect();

    let mut z = vec![0.0; len];
    let mut h = vec![0.0; len];
    let mut table = vec![0.0; words];
    let mut scratch = vec![0.0; words];
    let mut product = vec![0.0; words];
    for c in 0..n_ctx {
        let pc: f64 = (0..len).map(|i| ctx[(c >> i) & 1]).product();
        if pc == 0.0 {
            continue;
        }
        for y in 0..n_obs {
            let obs: Vec<usize> = (0..len).map(|i| digit(y, ny, i)).collect();
            // the x-word law of this slice is a product, built by doubling
            product[0] = pc;
            for i in 0..len {
                let ci = (c >> i) & 1;
                let mut m = t.prior[ci];
                if ny > 1 {
                    m[0] *= t.lik[obs[i]][0];
                    m[1] *= t.lik[obs[i]][1];
                }
                let half = 1usize << i;
                for b in 0..half {
                    product[b | half] = product[b] * m[1];
                    product[b] *= m[0];
                }
            }
            let mut any = false;
            for (b, &u) in tw.iter().enumerate() {
                table[u] = product[b];
                any |= product[b] > 0.0;
            }
            if any {
                accumulate(&table, &mut scratch, len, &mut z, &mut h);
            }
        }
    }
    for v in z.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    (z, h)
}

/// Adds the contribution of one `(context, observation)` slice. `table[u]`
/// is the joint mass of the u-word `u` (bit `i` = `u_i`) with that slice.
fn accumulate(table: &[f64], scratch: &mut [f64], len: usize, z: &mut [f64], h: &mut [f64]) {
    // marginal over the low i+1 bits, built from the top down
    scratch.copy_from_slice(table);
    for i in (0..len).rev() {
        let half = 1usize << i;
        for prefix in 0..half {
            let p0 = scratch[prefix];
            let p1 = scratch[prefix + half];
            z[i] += 2.0 * (p0 * p1).sqrt();
            let s = p0 + p1;
            if s > 0.0 {
                if p0 > 0.0 {
                    h[i] -= p0 * (p0 / s).log2();
                }
                if p1 > 0.0 {
                    h[i] -= p1 * (p1 / s).log2();
                }
            }
        }
        // fold bit i away
        for prefix in 0..half {
            scratch[prefix] += scratch[prefix + half];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_product_channel, noiseless_channel};
    use crate::prob::ConditionalPmf;

    fn bec_w_channel(eps: f64) -> BroadcastChannel {
        make_product_channel(
            &ConditionalPmf::bec(eps).unwrap(),
            &ConditionalPmf::bec(eps).unwrap(),
            &ConditionalPmf::identity(3),
        )
        .unwrap()
    }

    /// W uniform and passed straight to X.
    fn direct_w() -> LayeredDistribution {
        LayeredDistribution::from_params(0.5, [0.0, 1.0], [0.0, 1.0]).unwrap()
    }

    #[test]
    fn refuses_large_blocks() {
        let r = exact_single_layer(Layer::W, &direct_w(), &noiseless_channel(), 4);
        assert_eq!(r.unwrap_err(), Error::OracleTooLarge(4, 3));
    }

    #[test]
    fn bec_two_point_recursion() {
        for eps in [0.1, 0.5] {
            let s = exact_single_layer(Layer::W, &direct_w(), &bec_w_channel(eps), 1).unwrap();
            let z = s.receiver(1).unwrap();
            assert!((z[0] - (2.0 * eps - eps * eps)).abs() < 1e-12);
            assert!((z[1] - eps * eps).abs() < 1e-12);
            assert!(s.z_source.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn constant_source_has_zero_z() {
        let layered = LayeredDistribution::from_params(0.0, [0.3, 0.6], [0.2, 0.9]).unwrap();
        let s = exact_single_layer(Layer::W, &layered, &noiseless_channel(), 3).unwrap();
        assert!(s.z_source.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noiseless_x_layer_is_fully_observed() {
        let layered = LayeredDistribution::from_params(0.5, [0.3, 0.6], [0.5, 0.5]).unwrap();
        let s = exact_single_layer(Layer::X, &layered, &noiseless_channel(), 2).unwrap();
        assert!(s.receiver(1).unwrap().iter().all(|&v| v == 0.0));
        assert!(s.z_source.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn entropies_sum_to_block_entropy() {
        // chain rule: sum_i H(U_i | U^{<i}, Y) = N H(W | Y) for an i.i.d. pair
        let layered = LayeredDistribution::from_params(0.3, [0.2, 0.7], [0.1, 0.8]).unwrap();
        let ch = crate::channel::bsc_channel(0.1, 0.2, 0.1).unwrap();
        let s = exact_single_layer(Layer::W, &layered, &ch, 2).unwrap();
        let total: f64 = s.h_source.iter().sum();
        assert!((total - 4.0 * crate::prob::binary_entropy(0.3)).abs() < 1e-12);
    }
}
