//! A complete code: sets, layout, frozen table and seeds.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::BroadcastChannel;
use crate::error::{Error, Result};
use crate::io::stream;
use crate::polar::{
    exact_layer_stats, monte_carlo_layer_stats, select_sets, BitChannelSets, Layer, LayerStats,
    RankTargets, SelectionMode, MAX_EXACT_N,
};
use crate::prob::LayeredDistribution;
use crate::region::{layer_entropies, constructive_split, profile, RatePair, RateSplit, DEFAULT_SLACK};

use super::encoder::{layer_roles, Role};
use super::layout::{layout_for_rates, Budget, ChainingLayout};

/// Format version written into every instance document.
pub const INSTANCE_VERSION: u32 = 1;

/// Frozen values of one layer of one block, ascending by position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenBits {
    pub positions: Vec<usize>,
    pub bits: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeInstance {
    pub version: u32,
    pub n: u32,
    pub k: usize,
    pub layered: LayeredDistribution,
    /// The channel the sets were designed for; decoders use it by default.
    pub channel: BroadcastChannel,
    pub sets: BitChannelSets,
    pub layout: ChainingLayout,
    pub budget: Budget,
    /// Indexed by block, then layer.
    pub frozen: Vec<[FrozenBits; 3]>,
    pub frozen_seed: u64,
    pub common_randomness_seed: u64,
    #[serde(default)]
    pub rates: Option<RatePair>,
    #[serde(default)]
    pub split: Option<RateSplit>,
    /// Factor applied to the requested rates to make them fit.
    pub backoff_factor: f64,
}

impl CodeInstance {
    /// Assembles an instance and draws its frozen table.
    pub fn from_parts(
        layered: LayeredDistribution,
        channel: BroadcastChannel,
        sets: BitChannelSets,
        layout: ChainingLayout,
        frozen_seed: u64,
        common_randomness_seed: u64,
    ) -> Result<Self> {
        let len = sets.block_len;
        let n = crate::polar::transform::log2_len(len)?;
        let k = layout.k;
        let frozen = (0..k)
            .map(|t| {
                Layer::ALL.map(|l| {
                    let mut taken = vec![false; len];
                    for i in layout
                        .message_positions(t, l)
                        .into_iter()
                        .chain(layout.link_destinations(t, l))
                    {
                        taken[i] = true;
                    }
                    let positions: Vec<usize> = sets
                        .layer(l)
                        .high
                        .iter()
                        .copied()
                        .filter(|&i| !taken[i])
                        .collect();
                    let mut rng = stream(frozen_seed, t as u64 * 4 + l.index() as u64);
                    let bits = positions.iter().map(|_| rng.gen::<bool>() as u8).collect();
                    FrozenBits { positions, bits }
                })
            })
            .collect();
        Ok(Self {
            version: INSTANCE_VERSION,
            n,
            k,
            layered,
            channel,
            budget: layout.budget(),
            sets,
            layout,
            frozen,
            frozen_seed,
            common_randomness_seed,
            rates: None,
            split: None,
            backoff_factor: 1.0,
        })
    }

    pub fn block_len(&self) -> usize {
        self.sets.block_len
    }

    pub fn roles(&self) -> [Vec<Role>; 3] {
        Layer::ALL.map(|l| layer_roles(self.sets.layer(l), self.block_len()))
    }

    /// Public and private rates actually carried, in bits per channel use.
    pub fn realized_rates(&self) -> RatePair {
        let uses = (self.k * self.block_len()) as f64;
        RatePair {
            r0: self.budget.public_total as f64 / uses,
            r1: self.budget.private_total as f64 / uses,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: CodeInstance = serde_json::from_str(text)?;
        if inst.version != INSTANCE_VERSION {
            return Err(Error::Format(format!(
                "instance version {} is not supported (expected {INSTANCE_VERSION})",
                inst.version
            )));
        }
        inst.check()?;
        Ok(inst)
    }

    /// Structural consistency of a loaded document.
    fn check(&self) -> Result<()> {
        let len = self.block_len();
        if len != 1usize << self.n || self.frozen.len() != self.k || self.layout.k != self.k {
            return Err(Error::Format("instance dimensions disagree".into()));
        }
        if self.budget != self.layout.budget() {
            return Err(Error::Format("stored budget disagrees with the layout".into()));
        }
        for blk in &self.frozen {
            for f in blk {
                if f.positions.len() != f.bits.len() || f.positions.iter().any(|&i| i >= len) {
                    return Err(Error::Format("malformed frozen table".into()));
                }
            }
        }
        Ok(())
    }
}

/// How the H, L and receiver sets are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SelectionSpec {
    Threshold {
        #[serde(default = "default_beta")]
        beta: f64,
    },
    Rank {
        targets: [RankTargets; 3],
    },
    /// Rank selection from the limiting fractions. `H` and `L` get
    /// `source_scale` times their limits; each `I_j` gets the most reliable
    /// `receiver_scale` times the entropy gap `H(.) - H(.|Y_j)` of `H`.
    RankAuto {
        #[serde(default = "one")]
        source_scale: f64,
        receiver_scale: f64,
    },
}

fn default_beta() -> f64 {
    crate::polar::sets::DEFAULT_BETA
}

fn one() -> f64 {
    1.0
}

impl SelectionSpec {
    pub fn resolve(
        &self,
        layered: &LayeredDistribution,
        ch: &BroadcastChannel,
        block_len: usize,
    ) -> SelectionMode {
        match self {
            SelectionSpec::Threshold { beta } => SelectionMode::Threshold { beta: *beta },
            SelectionSpec::Rank { targets } => SelectionMode::Rank {
                targets: targets.clone(),
            },
            SelectionSpec::RankAuto {
                source_scale,
                receiver_scale,
            } => {
                let e = layer_entropies(layered, ch);
                let nf = block_len as f64;
                let targets = [0, 1, 2].map(|l| {
                    let h = e[l].source;
                    let high = source_scale * h;
                    // keep H and L disjoint after rounding up
                    let high_count = (high * nf - 1e-9).ceil().max(0.0);
                    let low = (source_scale * (1.0 - h)).min((nf - high_count) / nf);
                    let receiver_low = e[l]
                        .given_receiver
                        .iter()
                        .map(|(&j, &hj)| (j, (receiver_scale * (h - hj).max(0.0)).min(1.0)))
                        .collect();
                    RankTargets {
                        high,
                        low,
                        receiver_low,
                        info_within_high: true,
                    }
                });
                SelectionMode::Rank { targets }
            }
        }
    }
}

/// Exact statistics for `n <= 3`, Monte Carlo otherwise.
pub fn compute_stats(
    layered: &LayeredDistribution,
    ch: &BroadcastChannel,
    n: u32,
    samples: u64,
    seed: u64,
) -> Result<LayerStats> {
    if n <= MAX_EXACT_N {
        exact_layer_stats(layered, ch, n)
    } else {
        Ok(monte_carlo_layer_stats(layered, ch, n, samples, seed))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionParams {
    pub layered: LayeredDistribution,
    pub channel: BroadcastChannel,
    pub n: u32,
    pub k: usize,
    pub selection: SelectionSpec,
    pub stats_samples: u64,
    pub stats_seed: u64,
    pub rates: RatePair,
    /// Explicit split; computed from the rate pair when absent.
    pub split: Option<RateSplit>,
    pub backoff: bool,
    pub frozen_seed: u64,
    pub common_randomness_seed: u64,
}

/// Statistics, sets, split, layout and frozen table for `params`.
pub fn construct(params: &ConstructionParams) -> Result<CodeInstance> {
    let stats = compute_stats(
        &params.layered,
        &params.channel,
        params.n,
        params.stats_samples,
        params.stats_seed,
    )?;
    construct_from_stats(params, &stats)
}

/// As [`construct`], reusing precomputed statistics.
pub fn construct_from_stats(params: &ConstructionParams, stats: &LayerStats) -> Result<CodeInstance> {
    let len = 1usize << params.n;
    let mode = params.selection.resolve(&params.layered, &params.channel, len);
    let sets = select_sets(stats, &mode)?;
    let split = match params.split {
        Some(s) => s,
        None if params.rates.r0 == 0.0 && params.rates.r1 == 0.0 => RateSplit { r11: 0.0, r12: 0.0 },
        None => constructive_split(params.rates, &profile(&params.layered, &params.channel), DEFAULT_SLACK)?,
    };
    let (layout, factor) = layout_for_rates(&sets, params.rates.r0, split, params.k, params.backoff)?;
    let mut inst = CodeInstance::from_parts(
        params.layered.clone(),
        params.channel.clone(),
        sets,
        layout,
        params.frozen_seed,
        params.common_randomness_seed,
    )?;
    inst.rates = Some(params.rates);
    inst.split = Some(split);
    inst.backoff_factor = factor;
    Ok(inst)
}
