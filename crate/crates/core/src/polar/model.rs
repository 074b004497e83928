//! Per-position likelihood tables for the three superposition layers.

use serde::{Deserialize, Serialize};

use crate::channel::BroadcastChannel;
use crate::prob::LayeredDistribution;

use super::sc::Pair;

/// One of the three superposition layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    W,
    V,
    X,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::W, Layer::V, Layer::X];

    pub fn index(self) -> usize {
        match self {
            Layer::W => 0,
            Layer::V => 1,
            Layer::X => 2,
        }
    }

    /// Receivers whose observation is paired with this layer.
    pub fn receivers(self) -> &'static [u8] {
        match self {
            Layer::W => &[1, 2, 3],
            Layer::V => &[1, 3],
            Layer::X => &[1],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::W => "w",
            Layer::V => "v",
            Layer::X => "x",
        }
    }
}

/// `prior[c][b]`: law of the layer symbol `b` given the context symbol `c`
/// (nothing for W, `w` for V, `v` for X). `lik[y][b]`: `p(y | b)` for one
/// receiver with the lower layers marginalized.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTables {
    pub prior: [Pair; 2],
    pub lik: Vec<Pair>,
}

impl LayerTables {
    /// Source-only tables (no observation).
    pub fn source(layer: Layer, layered: &LayeredDistribution) -> Self {
        Self {
            prior: prior_table(layer, layered),
            lik: vec![[1.0, 1.0]],
        }
    }

    pub fn with_receiver(
        layer: Layer,
        layered: &LayeredDistribution,
        ch: &BroadcastChannel,
        receiver: u8,
    ) -> Self {
        let kernel = ch.kernel(receiver);
        let ny = kernel.output_size();
        // p(y | layer symbol)
        let down: [[f64; 2]; 2] = match layer {
            Layer::W => {
                let k = layered.px_given_w();
                [[k.p(0, 0), k.p(0, 1)], [k.p(1, 0), k.p(1, 1)]]
            }
            Layer::V => {
                let k = &layered.px_given_v;
                [[k.p(0, 0), k.p(0, 1)], [k.p(1, 0), k.p(1, 1)]]
            }
            Layer::X => [[1.0, 0.0], [0.0, 1.0]],
        };
        let lik = (0..ny)
            .map(|y| {
                let mut pair = [0.0; 2];
                for (b, slot) in pair.iter_mut().enumerate() {
                    *slot = (0..2).map(|x| down[b][x] * kernel.p(x, y)).sum();
                }
                pair
            })
            .collect();
        Self {
            prior: prior_table(layer, layered),
            lik,
        }
    }

    #[inline]
    pub fn leaf(&self, context: u8, y: Option<usize>) -> Pair {
        let p = self.prior[context as usize];
        match y {
            Some(y) => {
                let l = self.lik[y];
                [p[0] * l[0], p[1] * l[1]]
            }
            None => p,
        }
    }

    /// Writes one track of leaf pairs into `out`.
    pub fn fill(&self, context: Option<&[u8]>, y: Option<&[usize]>, out: &mut [Pair]) {
        for (j, slot) in out.iter_mut().enumerate() {
            let c = context.map_or(0, |c| c[j]);
            *slot = self.leaf(c, y.map(|y| y[j]));
        }
    }
}

fn prior_table(layer: Layer, layered: &LayeredDistribution) -> [Pair; 2] {
    match layer {
        Layer::W => {
            let p = [layered.pw.p(0), layered.pw.p(1)];
            [p, p]
        }
        Layer::V => {
            let k = &layered.pv_given_w;
            [[k.p(0, 0), k.p(0, 1)], [k.p(1, 0), k.p(1, 1)]]
        }
        Layer::X => {
            let k = &layered.px_given_v;
            [[k.p(0, 0), k.p(0, 1)], [k.p(1, 0), k.p(1, 1)]]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bsc_channel;

    #[test]
    fn w_layer_likelihood_marginalizes_lower_layers() {
        let layered = LayeredDistribution::from_params(0.4, [0.2, 0.7], [0.1, 0.95]).unwrap();
        let ch = bsc_channel(0.1, 0.2, 0.05).unwrap();
        let t = LayerTables::with_receiver(Layer::W, &layered, &ch, 3);
        for w in 0..2 {
            let mut direct = 0.0;
            for v in 0..2 {
                for x in 0..2 {
                    direct += layered.pv_given_w.p(w, v)
                        * layered.px_given_v.p(v, x)
                        * ch.kernel(3).p(x, 1);
                }
            }
            assert!((t.lik[1][w] - direct).abs() < 1e-15);
        }
    }
}
