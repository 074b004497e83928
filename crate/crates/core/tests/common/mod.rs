//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use chainpolar::channel::noiseless_channel;
use chainpolar::codec::{build_layout, BitCounts, CaseTag, CodeInstance};
use chainpolar::polar::{
    monte_carlo_layer_stats, BitChannelSets, Layer, LayerSets, LayerStats, ReceiverSets, SelectionMode,
};
use chainpolar::prob::LayeredDistribution;

pub const SYNTH_N: u32 = 7;

/// V a slightly noisy copy of W, X equal to V.
pub fn synthetic_layered() -> LayeredDistribution {
    LayeredDistribution::from_params(0.5, [0.02, 0.98], [0.0, 1.0]).unwrap()
}

pub fn synthetic_stats() -> LayerStats {
    monte_carlo_layer_stats(&synthetic_layered(), &noiseless_channel(), SYNTH_N, 4000, 17)
}

fn order_by(z: &[f64], among: &[usize]) -> Vec<usize> {
    let mut v = among.to_vec();
    v.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    v
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn receiver(high: &[usize], info: Vec<usize>, len: usize) -> ReceiverSets {
    let low = sorted(
        (0..len)
            .filter(|i| !high.contains(i) || info.contains(i))
            .collect(),
    );
    ReceiverSets {
        high: (0..len).filter(|i| !low.contains(i)).collect(),
        frozen: high.iter().copied().filter(|i| !info.contains(i)).collect(),
        low,
        info,
    }
}

/// Hand-made sets with overlaps chosen so that every case can be reached:
/// in W, `A` is read by receivers 2 and 3, `C` by 3 only and `D` by 2 only;
/// in V, `D'` is read by receivers 1 and 3, then 3 only, then 1 only.
pub fn synthetic_sets(stats: &LayerStats) -> BitChannelSets {
    let len = 1usize << SYNTH_N;
    let all: Vec<usize> = (0..len).collect();

    let zw = stats[0].receiver(1).unwrap();
    let r = order_by(zw, &all);
    let (a, c, d) = (&r[0..16], &r[16..24], &r[24..40]);
    let cat = |parts: &[&[usize]]| -> Vec<usize> { parts.concat() };
    let w = LayerSets {
        layer: Layer::W,
        high: all.clone(),
        low: vec![],
        unpolarized: vec![],
        receivers: BTreeMap::from([
            (1, receiver(&all, cat(&[a, c, d]), len)),
            (2, receiver(&all, cat(&[a, d]), len)),
            (3, receiver(&all, cat(&[a, c]), len)),
        ]),
    };

    let zv = &stats[1].z_source;
    let by_source: Vec<usize> = order_by(zv, &all).into_iter().rev().collect();
    let high = sorted(by_source[..18].to_vec());
    let low = sorted(by_source[28..].to_vec());
    let unpolarized = sorted(by_source[18..28].to_vec());
    let hv = order_by(stats[1].receiver(1).unwrap(), &high);
    let (both, only3, only1) = (&hv[0..4], &hv[4..10], &hv[10..14]);
    let v = LayerSets {
        layer: Layer::V,
        high: high.clone(),
        low,
        unpolarized,
        receivers: BTreeMap::from([
            (1, receiver(&high, cat(&[both, only1]), len)),
            (3, receiver(&high, cat(&[both, only3]), len)),
        ]),
    };

    let x = LayerSets {
        layer: Layer::X,
        high: vec![],
        low: all.clone(),
        unpolarized: vec![],
        receivers: BTreeMap::from([(1, receiver(&[], vec![], len))]),
    };
    BitChannelSets {
        block_len: len,
        layers: [w, v, x],
        delta_n: None,
        selection: SelectionMode::Threshold { beta: 0.3 },
    }
}

/// Per-block counts that land in `tag` on the synthetic sets.
pub fn synthetic_counts(tag: CaseTag) -> BitCounts {
    let (public, v_private) = match tag {
        CaseTag::A1 => (26, 7),
        CaseTag::A2 => (26, 3),
        CaseTag::B1 => (20, 5),
        CaseTag::B2 => (10, 5),
    };
    BitCounts {
        public,
        v_private,
        x_private: 0,
    }
}

pub fn synthetic_instance(stats: &LayerStats, tag: CaseTag, k: usize) -> CodeInstance {
    let sets = synthetic_sets(stats);
    let layout = build_layout(&sets, synthetic_counts(tag), k).unwrap();
    assert_eq!(layout.case_tag, tag);
    CodeInstance::from_parts(synthetic_layered(), noiseless_channel(), sets, layout, 31, 32).unwrap()
}
