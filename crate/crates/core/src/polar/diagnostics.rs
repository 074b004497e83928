//! Observed set fractions against their limiting values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::BroadcastChannel;
use crate::prob::LayeredDistribution;
use crate::region::layer_entropies;

use super::model::Layer;
use super::sets::BitChannelSets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverDiagnostics {
    /// `|I_j| / N`.
    pub info_fraction: f64,
    /// The mutual information `|I_j| / N` tends to.
    pub mutual_information: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDiagnostics {
    pub layer: Layer,
    pub high_fraction: f64,
    /// The source entropy `|H| / N` tends to.
    pub source_entropy: f64,
    pub low_fraction: f64,
    /// `|R| / N`, the share of indices that are neither high nor low.
    pub unpolarized_fraction: f64,
    pub receivers: BTreeMap<u8, ReceiverDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationReport {
    pub block_len: usize,
    pub layers: Vec<LayerDiagnostics>,
}

impl PolarizationReport {
    /// Largest `| |I_j|/N - I |` over layers and receivers.
    pub fn max_info_gap(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.receivers.values())
            .map(|r| (r.info_fraction - r.mutual_information).abs())
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Display for PolarizationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "block length {}", self.block_len)?;
        for l in &self.layers {
            writeln!(
                f,
                "  {}: |H|/N {:.4} vs {:.4}, |L|/N {:.4}, |R|/N {:.4}",
                l.layer.name(),
                l.high_fraction,
                l.source_entropy,
                l.low_fraction,
                l.unpolarized_fraction
            )?;
            for (j, r) in &l.receivers {
                writeln!(
                    f,
                    "    receiver {j}: |I|/N {:.4} vs {:.4}",
                    r.info_fraction, r.mutual_information
                )?;
            }
        }
        Ok(())
    }
}

pub fn polarization_diagnostics(
    sets: &BitChannelSets,
    layered: &LayeredDistribution,
    ch: &BroadcastChannel,
) -> PolarizationReport {
    let entropies = layer_entropies(layered, ch);
    let nf = sets.block_len as f64;
    let layers = Layer::ALL
        .iter()
        .map(|&layer| {
            let s = sets.layer(layer);
            let e = &entropies[layer.index()];
            let receivers = s
                .receivers
                .iter()
                .map(|(&j, r)| {
                    let hj = e.given_receiver.get(&j).copied().unwrap_or(e.source);
                    (
                        j,
                        ReceiverDiagnostics {
                            info_fraction: r.info.len() as f64 / nf,
                            mutual_information: (e.source - hj).max(0.0),
                        },
                    )
                })
                .collect();
            LayerDiagnostics {
                layer,
                high_fraction: s.high.len() as f64 / nf,
                source_entropy: e.source,
                low_fraction: s.low.len() as f64 / nf,
                unpolarized_fraction: s.unpolarized.len() as f64 / nf,
                receivers,
            }
        })
        .collect();
    PolarizationReport {
        block_len: sets.block_len,
        layers,
    }
}
