use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::Layer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimation {
    Exact,
    MonteCarlo,
}

/// Bhattacharyya parameters of every bit-channel of one layer.
///
/// `z_source[i]` conditions on the past and the lower-layer context only;
/// `z_receiver[j][i]` additionally conditions on receiver `j`'s block.
/// Monte Carlo runs fill the standard errors; exact runs fill the entropies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitChannelStats {
    pub layer: Layer,
    pub z_source: Vec<f64>,
    pub z_receiver: BTreeMap<u8, Vec<f64>>,
    pub estimation: Estimation,
    pub sample_count: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub se_source: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub se_receiver: BTreeMap<u8, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h_source: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub h_receiver: BTreeMap<u8, Vec<f64>>,
}

impl BitChannelStats {
    pub fn block_len(&self) -> usize {
        self.z_source.len()
    }

    pub fn receiver(&self, j: u8) -> Option<&[f64]> {
        self.z_receiver.get(&j).map(Vec::as_slice)
    }
}

/// Stats for the W, V and X layers, in that order.
pub type LayerStats = [BitChannelStats; 3];
