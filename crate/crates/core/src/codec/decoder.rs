//! SC decoding at the three receivers.
//!
//! Receiver 3 walks the blocks forward, receivers 1 and 2 walk them
//! backward; link values resolved in one block become known positions of
//! its neighbour.

use crate::channel::{BroadcastChannel, ChannelSample};
use crate::polar::{Layer, LayerTables, Pair, ScEngine};

use super::encoder::{argmax, Role};
use super::instance::CodeInstance;
use super::randomness::{BitSampler, CommonRandomness};

/// Recovered messages and the u-vectors behind them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutput {
    pub public: Vec<u8>,
    /// Only receiver 1 recovers the private message.
    pub private: Option<Vec<u8>>,
    /// Per block, per layer. Layers a receiver does not decode hold the
    /// values it learned over links and zeros elsewhere.
    pub u: Vec<[Vec<u8>; 3]>,
}

/// Decoding tables for one instance and one channel model.
pub struct Decoder<'a> {
    inst: &'a CodeInstance,
    source: [LayerTables; 3],
    /// Indexed by receiver - 1, then layer.
    receiver: Vec<[Option<LayerTables>; 3]>,
    roles: [Vec<Role>; 3],
}

impl<'a> Decoder<'a> {
    /// Decoder whose conditionals use `model` for the channel law.
    pub fn new(inst: &'a CodeInstance, model: &BroadcastChannel) -> Self {
        let receiver = (1..=3u8)
            .map(|j| {
                Layer::ALL.map(|l| {
                    l.receivers()
                        .contains(&j)
                        .then(|| LayerTables::with_receiver(l, &inst.layered, model, j))
                })
            })
            .collect();
        Self {
            inst,
            source: Layer::ALL.map(|l| LayerTables::source(l, &inst.layered)),
            receiver,
            roles: inst.roles(),
        }
    }

    /// Layers receiver `j` runs SC on.
    pub fn decoded_layers(&self, j: u8) -> &'static [Layer] {
        match j {
            1 => &[Layer::W, Layer::V, Layer::X],
            2 => &[Layer::W],
            _ if self.inst.layout.case_tag.uses_v_for_public() => &[Layer::W, Layer::V],
            _ => &[Layer::W],
        }
    }

    /// Decodes the `k` observation blocks of receiver `j`.
    pub fn decode(&self, j: u8, ys: &[&[usize]]) -> DecodeOutput {
        let inst = self.inst;
        let k = inst.k;
        let len = inst.block_len();
        assert_eq!(ys.len(), k, "one observation block per code block");
        let mut cr = CommonRandomness::new(inst.common_randomness_seed);

        let mut known: Vec<[Vec<Option<u8>>; 3]> = (0..k)
            .map(|t| {
                Layer::ALL.map(|l| {
                    let mut kv = vec![None; len];
                    let f = &inst.frozen[t][l.index()];
                    for (&i, &b) in f.positions.iter().zip(&f.bits) {
                        kv[i] = Some(b);
                    }
                    kv
                })
            })
            .collect();
        let mut u: Vec<[Vec<u8>; 3]> = (0..k).map(|_| [vec![0; len], vec![0; len], vec![0; len]]).collect();

        let layers = self.decoded_layers(j);
        let order: Vec<usize> = if j == 3 { (0..k).collect() } else { (0..k).rev().collect() };
        let mut engine = ScEngine::new(inst.n, 2);
        let mut leaves: Vec<Pair> = vec![[0.0; 2]; 2 * len];

        for &t in &order {
            let mut context: Option<Vec<u8>> = None;
            for &layer in layers {
                let li = layer.index();
                let rt = self.receiver[(j - 1) as usize][li]
                    .as_ref()
                    .expect("layer decoded by a receiver that observes it");
                self.source[li].fill(context.as_deref(), None, &mut leaves[..len]);
                rt.fill(context.as_deref(), Some(ys[t]), &mut leaves[len..]);
                let kv = &known[t][li];
                let roles = &self.roles[li];
                let dec = &mut u[t][li];
                let x = engine
                    .run(&leaves, |i, pairs| {
                        let b = match (kv[i], roles[i]) {
                            (Some(b), _) => b,
                            (None, Role::Low) => argmax(pairs[0]),
                            (None, Role::Random) => cr.sample(t, layer, i, pairs[0][1]),
                            (None, Role::High) => argmax(pairs[1]),
                        };
                        dec[i] = b;
                        b
                    })
                    .to_vec();
                context = Some(x);
            }
            for l in Layer::ALL {
                if !layers.contains(&l) {
                    for (d, kv) in u[t][l.index()].iter_mut().zip(&known[t][l.index()]) {
                        *d = kv.unwrap_or(0);
                    }
                }
            }
            for link in &inst.layout.copy_links {
                for (&(sl, si), &(dl, di)) in link.sources.iter().zip(&link.dests) {
                    if j == 3 {
                        if t + 1 < k {
                            known[t + 1][dl.index()][di] = Some(u[t][sl.index()][si]);
                        }
                    } else if t >= 1 {
                        known[t - 1][sl.index()][si] = Some(u[t][dl.index()][di]);
                    }
                }
            }
        }

        let read = |slots: Vec<super::layout::Slot>| -> Vec<u8> {
            slots
                .iter()
                .map(|s| u[s.block][s.layer.index()][s.index])
                .collect()
        };
        let public = read(inst.layout.public_slots());
        let private = (j == 1).then(|| read(inst.layout.private_slots()));
        DecodeOutput { public, private, u }
    }
}

fn observations(samples: &[ChannelSample], j: u8) -> Vec<&[usize]> {
    samples.iter().map(|s| s.for_receiver(j)).collect()
}

/// Public and private message at receiver 1, decoding with the instance's
/// channel model.
pub fn decode_receiver1(inst: &CodeInstance, samples: &[ChannelSample]) -> (Vec<u8>, Vec<u8>) {
    let out = Decoder::new(inst, &inst.channel).decode(1, &observations(samples, 1));
    (out.public, out.private.unwrap_or_default())
}

pub fn decode_receiver2(inst: &CodeInstance, samples: &[ChannelSample]) -> Vec<u8> {
    Decoder::new(inst, &inst.channel).decode(2, &observations(samples, 2)).public
}

pub fn decode_receiver3(inst: &CodeInstance, samples: &[ChannelSample]) -> Vec<u8> {
    Decoder::new(inst, &inst.channel).decode(3, &observations(samples, 3)).public
}
