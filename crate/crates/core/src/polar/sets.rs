//! Index-set algebra over bit-channel statistics.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::Layer;
use super::stats::{BitChannelStats, LayerStats};

/// Default threshold exponent for `delta_n = 2^{-N^beta}`.
pub const DEFAULT_BETA: f64 = 0.3;

/// Target fractions for rank selection in one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankTargets {
    /// Fraction of indices with the largest source `Z` placed in `H`.
    pub high: f64,
    /// Fraction with the smallest source `Z` placed in `L`.
    pub low: f64,
    /// Per receiver: fraction with the smallest receiver `Z` placed in `L_{.|Y_j}`.
    #[serde(deserialize_with = "receiver_keys")]
    pub receiver_low: BTreeMap<u8, f64>,
    /// Read `receiver_low` as the size of `I_j`, filled with the members of
    /// `H` of smallest receiver `Z`; `L_{.|Y_j}` is then `I_j` plus every
    /// index outside `H`.
    #[serde(default)]
    pub info_within_high: bool,
}

/// Receiver-keyed map whose keys may arrive as strings, as they do from
/// TOML and from buffered (tagged) JSON.
fn receiver_keys<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<u8, f64>, D::Error> {
    use serde::de::Error as _;
    let raw: BTreeMap<String, f64> = Deserialize::deserialize(d)?;
    raw.into_iter()
        .map(|(k, v)| k.parse::<u8>().map(|k| (k, v)).map_err(|_| D::Error::custom(format!("bad receiver '{k}'"))))
        .collect()
}

impl RankTargets {
    /// Targets equal to `scale` times the limiting fractions, given the
    /// source entropy and the per-receiver conditional entropies of the layer.
    pub fn from_entropies(h_source: f64, h_receiver: &BTreeMap<u8, f64>, scale: f64) -> Self {
        Self {
            high: scale * h_source,
            low: scale * (1.0 - h_source),
            receiver_low: h_receiver
                .iter()
                .map(|(&j, &h)| (j, scale * (1.0 - h)))
                .collect(),
            info_within_high: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SelectionMode {
    /// `H = {Z >= 1 - delta}`, `L = {Z <= delta}` with `delta = 2^{-N^beta}`.
    Threshold { beta: f64 },
    /// Fixed-size selections by rank; targets for W, V, X in that order.
    Rank { targets: [RankTargets; 3] },
}

/// Sets built from one receiver's statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverSets {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    /// `I_j = L_{.|Y_j} ∩ H`, most reliable first (ascending receiver
    /// Bhattacharyya parameter, ties to the lower index).
    pub info: Vec<usize>,
    /// `F_j = H \ I_j`.
    pub frozen: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSets {
    pub layer: Layer,
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    /// Neither high nor low.
    pub unpolarized: Vec<usize>,
    pub receivers: BTreeMap<u8, ReceiverSets>,
}

impl LayerSets {
    pub fn receiver(&self, j: u8) -> &ReceiverSets {
        &self.receivers[&j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitChannelSets {
    pub block_len: usize,
    pub layers: [LayerSets; 3],
    /// Threshold used in threshold mode.
    pub delta_n: Option<f64>,
    pub selection: SelectionMode,
}

impl BitChannelSets {
    pub fn layer(&self, layer: Layer) -> &LayerSets {
        &self.layers[layer.index()]
    }
}

pub fn delta_n(block_len: usize, beta: f64) -> f64 {
    2f64.powf(-(block_len as f64).powf(beta))
}

fn rank_count(fraction: f64, len: usize) -> usize {
    ((fraction * len as f64 - 1e-9).ceil().max(0.0) as usize).min(len)
}

/// The `count` indices of largest (or smallest) `z`, ties to the lower index.
fn by_rank(z: &[f64], count: usize, largest: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| {
        let ord = z[a].total_cmp(&z[b]);
        let ord = if largest { ord.reverse() } else { ord };
        ord.then(a.cmp(&b))
    });
    let mut out: Vec<usize> = idx.into_iter().take(count).collect();
    out.sort_unstable();
    out
}

fn threshold(z: &[f64], delta: f64) -> (Vec<usize>, Vec<usize>) {
    let high = (0..z.len()).filter(|&i| z[i] >= 1.0 - delta).collect();
    let low = (0..z.len()).filter(|&i| z[i] <= delta).collect();
    (high, low)
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let b: BTreeSet<usize> = b.iter().copied().collect();
    a.iter().copied().filter(|i| b.contains(i)).collect()
}

fn difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let b: BTreeSet<usize> = b.iter().copied().collect();
    a.iter().copied().filter(|i| !b.contains(i)).collect()
}

fn select_layer(stats: &BitChannelStats, mode: &SelectionMode) -> Result<(LayerSets, Option<f64>)> {
    let len = stats.block_len();
    let layer = stats.layer;
    let (high, low, delta, recv): (Vec<usize>, Vec<usize>, Option<f64>, BTreeMap<u8, (Vec<usize>, Vec<usize>)>) =
        match mode {
            SelectionMode::Threshold { beta } => {
                let d = delta_n(len, *beta);
                let (h, l) = threshold(&stats.z_source, d);
                let recv = stats
                    .z_receiver
                    .iter()
                    .map(|(&j, z)| (j, threshold(z, d)))
                    .collect();
                (h, l, Some(d), recv)
            }
            SelectionMode::Rank { targets } => {
                let t = &targets[layer.index()];
                let h = by_rank(&stats.z_source, rank_count(t.high, len), true);
                let l = by_rank(&stats.z_source, rank_count(t.low, len), false);
                let mut recv = BTreeMap::new();
                for (&j, z) in &stats.z_receiver {
                    let frac = *t.receiver_low.get(&j).ok_or_else(|| {
                        Error::Selection(format!(
                            "no receiver {j} target for layer {}",
                            layer.name()
                        ))
                    })?;
                    let rl = if t.info_within_high {
                        let zh: Vec<f64> = h.iter().map(|&i| z[i]).collect();
                        let best: Vec<usize> = by_rank(&zh, rank_count(frac, len).min(h.len()), false)
                            .into_iter()
                            .map(|r| h[r])
                            .collect();
                        let mut rl = difference(&(0..len).collect::<Vec<_>>(), &h);
                        rl.extend(best);
                        rl.sort_unstable();
                        rl
                    } else {
                        by_rank(z, rank_count(frac, len), false)
                    };
                    let rh = difference(&(0..len).collect::<Vec<_>>(), &rl);
                    recv.insert(j, (rh, rl));
                }
                (h, l, None, recv)
            }
        };
    let overlap = intersect(&high, &low);
    if !overlap.is_empty() {
        return Err(Error::Selection(format!(
            "layer {}: high and low sets share {} indices",
            layer.name(),
            overlap.len()
        )));
    }
    let mut polarized: Vec<usize> = high.iter().chain(&low).copied().collect();
    polarized.sort_unstable();
    let unpolarized = difference(&(0..len).collect::<Vec<_>>(), &polarized);
    let receivers = recv
        .into_iter()
        .map(|(j, (rh, rl))| {
            let z = &stats.z_receiver[&j];
            let frozen = difference(&high, &rl);
            let mut info = intersect(&high, &rl);
            info.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
            (
                j,
                ReceiverSets {
                    high: rh,
                    low: rl,
                    info,
                    frozen,
                },
            )
        })
        .collect();
    Ok((
        LayerSets {
            layer,
            high,
            low,
            unpolarized,
            receivers,
        },
        delta,
    ))
}

pub fn select_sets(stats: &LayerStats, mode: &SelectionMode) -> Result<BitChannelSets> {
    let len = stats[0].block_len();
    if stats.iter().any(|s| s.block_len() != len) {
        return Err(Error::DimensionMismatch("layer stats disagree on block length".into()));
    }
    let (w, delta) = select_layer(&stats[0], mode)?;
    let (v, _) = select_layer(&stats[1], mode)?;
    let (x, _) = select_layer(&stats[2], mode)?;
    Ok(BitChannelSets {
        block_len: len,
        layers: [w, v, x],
        delta_n: delta,
        selection: mode.clone(),
    })
}

/// Indices in `L_{W|Y2}` but not in `L_{W|Y1}` whose receiver-1 and
/// receiver-2 estimates differ by more than `tol`. Under exact statistics
/// degradation makes this empty; Monte Carlo noise may produce near-ties,
/// which are not reported.
pub fn degradation_nesting_violations(
    sets: &BitChannelSets,
    w_stats: &BitChannelStats,
    tol: f64,
) -> Vec<usize> {
    let w = sets.layer(Layer::W);
    let (l1, l2) = (&w.receiver(1).low, &w.receiver(2).low);
    let (z1, z2) = (
        w_stats.receiver(1).unwrap_or(&[]),
        w_stats.receiver(2).unwrap_or(&[]),
    );
    difference(l2, l1)
        .into_iter()
        .filter(|&i| z1.get(i).zip(z2.get(i)).is_some_and(|(a, b)| (a - b).abs() > tol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar::stats::Estimation;

    fn stats(layer: Layer, z_source: Vec<f64>, recv: &[(u8, Vec<f64>)]) -> BitChannelStats {
        BitChannelStats {
            layer,
            z_source,
            z_receiver: recv.iter().cloned().collect(),
            estimation: Estimation::Exact,
            sample_count: 0,
            se_source: vec![],
            se_receiver: BTreeMap::new(),
            h_source: vec![],
            h_receiver: BTreeMap::new(),
        }
    }

    fn uniform_stats(z: f64) -> LayerStats {
        [
            stats(Layer::W, vec![z; 8], &[(1, vec![z; 8]), (2, vec![z; 8]), (3, vec![z; 8])]),
            stats(Layer::V, vec![z; 8], &[(1, vec![z; 8]), (3, vec![z; 8])]),
            stats(Layer::X, vec![z; 8], &[(1, vec![z; 8])]),
        ]
    }

    #[test]
    fn unobservable_uniform_source_is_all_high() {
        let s = select_sets(&uniform_stats(1.0), &SelectionMode::Threshold { beta: 0.3 }).unwrap();
        for l in &s.layers {
            assert_eq!(l.high, (0..8).collect::<Vec<_>>());
            assert!(l.low.is_empty() && l.unpolarized.is_empty());
        }
    }

    #[test]
    fn deterministic_source_is_all_low() {
        let s = select_sets(&uniform_stats(0.0), &SelectionMode::Threshold { beta: 0.3 }).unwrap();
        for l in &s.layers {
            assert_eq!(l.low, (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn rank_ties_go_to_lower_index() {
        let z = vec![0.5, 0.9, 0.5, 0.1, 0.9, 0.5, 0.2, 0.5];
        assert_eq!(by_rank(&z, 3, true), vec![0, 1, 4]);
        assert_eq!(by_rank(&z, 3, false), vec![0, 3, 6]);
    }

    #[test]
    fn rank_overlap_is_an_error() {
        let t = RankTargets {
            high: 0.6,
            low: 0.6,
            receiver_low: [(1, 0.5), (2, 0.5), (3, 0.5)].into_iter().collect(),
            info_within_high: false,
        };
        let mode = SelectionMode::Rank {
            targets: [t.clone(), t.clone(), t],
        };
        assert!(matches!(
            select_sets(&uniform_stats(0.5), &mode),
            Err(Error::Selection(_))
        ));
    }
}
