//! Distance between the encoder's output law and the target law.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::BroadcastChannel;
use crate::codec::encoder::argmax;
use crate::codec::{compute_stats, layer_roles, sc_encode_layer, FreshRandomness, LayerJob, Role, SelectionSpec};
use crate::error::{Error, Result};
use crate::io::stream;
use crate::polar::{select_sets, BitChannelSets, Layer, LayerTables, ScEngine, MAX_EXACT_N};
use crate::prob::LayeredDistribution;

use super::Seeds;

#[derive(Debug, Clone, PartialEq)]
pub struct TvConfig {
    pub layered: LayeredDistribution,
    /// Only used to build the sets; the distance concerns the encoder alone.
    pub channel: BroadcastChannel,
    pub ns: Vec<u32>,
    /// Encoded blocks per point.
    pub samples: u64,
    /// Batches used for the standard error.
    pub batches: u64,
    pub selection: SelectionSpec,
    pub stats_samples: u64,
    pub seeds: Seeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvPoint {
    pub n: u32,
    pub samples: u64,
    /// Distance between the pooled single-letter `(W, V, X)` law of the
    /// encoder output and `p(w) p(v|w) p(x|v)`.
    pub tv: f64,
    /// Batch-means standard error of `tv`.
    pub std_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactTv>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvReport {
    pub points: Vec<TvPoint>,
}

/// Exact block-level distance and the per-index sum that bounds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactTv {
    pub n: u32,
    pub tv: f64,
    /// `sum over layers and indices of E_P sum_b |P(b|past) - Q(b|past)|`;
    /// twice the distance never exceeds it.
    pub bound: f64,
}

impl ExactTv {
    pub fn within_bound(&self) -> bool {
        2.0 * self.tv <= self.bound + 1e-12
    }
}

fn roles_of(sets: &BitChannelSets) -> [Vec<Role>; 3] {
    Layer::ALL.map(|l| layer_roles(sets.layer(l), sets.block_len))
}

/// Cell `4w + 2v + x` counts of one batch of freshly encoded blocks.
fn encode_batch(
    n: u32,
    roles: &[Vec<Role>; 3],
    tables: &[LayerTables; 3],
    blocks: u64,
    seed: u64,
    id: u64,
) -> [u64; 8] {
    let len = 1usize << n;
    let mut sampler = FreshRandomness { rng: stream(seed, id) };
    let mut engine = ScEngine::new(n, 1);
    let mut counts = [0u64; 8];
    let mut assign = vec![0u8; len];
    for _ in 0..blocks {
        let mut context: Option<Vec<u8>> = None;
        let mut seqs: Vec<Vec<u8>> = Vec::with_capacity(3);
        for layer in Layer::ALL {
            for a in assign.iter_mut() {
                *a = sampler.rng.gen::<bool>() as u8;
            }
            let job = LayerJob {
                block: 0,
                layer,
                tables: &tables[layer.index()],
                context: context.as_deref(),
                roles: &roles[layer.index()],
                assignments: &assign,
            };
            let (_, x) = sc_encode_layer(&mut engine, &job, &mut sampler, None);
            seqs.push(x.clone());
            context = Some(x);
        }
        for i in 0..len {
            counts[(4 * seqs[0][i] + 2 * seqs[1][i] + seqs[2][i]) as usize] += 1;
        }
    }
    counts
}

fn tv_of_counts(counts: &[u64; 8], target: &[f64; 8]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    0.5 * counts
        .iter()
        .zip(target)
        .map(|(&c, &p)| (c as f64 / total as f64 - p).abs())
        .sum::<f64>()
}

/// Sets for one exponent under the configured selection.
pub fn tv_sets(cfg: &TvConfig, n: u32) -> Result<BitChannelSets> {
    let stats = compute_stats(&cfg.layered, &cfg.channel, n, cfg.stats_samples, cfg.seeds.stats)?;
    let mode = cfg.selection.resolve(&cfg.layered, &cfg.channel, 1usize << n);
    select_sets(&stats, &mode)
}

pub fn run_tv_trend(cfg: &TvConfig) -> Result<TvReport> {
    if cfg.batches < 2 || cfg.samples < cfg.batches {
        return Err(Error::Config("need at least two batches and one sample per batch".into()));
    }
    let target = cfg.layered.joint_wvx();
    let tables = Layer::ALL.map(|l| LayerTables::source(l, &cfg.layered));
    let mut points = Vec::with_capacity(cfg.ns.len());
    for &n in &cfg.ns {
        let sets = tv_sets(cfg, n)?;
        let roles = roles_of(&sets);
        let per_batch: Vec<[u64; 8]> = (0..cfg.batches)
            .into_par_iter()
            .map(|b| {
                let lo = cfg.samples * b / cfg.batches;
                let hi = cfg.samples * (b + 1) / cfg.batches;
                encode_batch(n, &roles, &tables, hi - lo, cfg.seeds.trials, ((n as u64) << 32) | b)
            })
            .collect();
        let mut pooled = [0u64; 8];
        for c in &per_batch {
            for (p, v) in pooled.iter_mut().zip(c) {
                *p += v;
            }
        }
        let batch_tv: Vec<f64> = per_batch.iter().map(|c| tv_of_counts(c, &target)).collect();
        let b = batch_tv.len() as f64;
        let mean = batch_tv.iter().sum::<f64>() / b;
        let var = batch_tv.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (b - 1.0);
        let exact = if n <= MAX_EXACT_N {
            Some(exact_block_tv(&cfg.layered, &sets)?)
        } else {
            None
        };
        points.push(TvPoint {
            n,
            samples: cfg.samples,
            tv: tv_of_counts(&pooled, &target),
            std_error: (var / b).sqrt(),
            exact,
        });
    }
    Ok(TvReport { points })
}

/// Conditional probabilities `P(u_i = 1 | u^{i-1}, context)` along `u`.
fn trace_of(engine: &mut ScEngine, tables: &LayerTables, context: Option<&[u8]>, u: &[u8]) -> (Vec<f64>, Vec<u8>) {
    let roles = vec![Role::High; u.len()];
    let job = LayerJob {
        block: 0,
        layer: Layer::W,
        tables,
        context,
        roles: &roles,
        assignments: u,
    };
    let mut never = FreshRandomness { rng: stream(0, 0) };
    let mut trace = Vec::with_capacity(u.len());
    let (_, x) = sc_encode_layer(engine, &job, &mut never, Some(&mut trace));
    (trace, x)
}

/// Probability of `u` under the target law and under the encoder, and the
/// summed per-index discrepancy, for one layer.
fn layer_terms(trace: &[f64], u: &[u8], roles: &[Role]) -> (f64, f64, f64) {
    let (mut p, mut q, mut d) = (1.0, 1.0, 0.0);
    for ((&p1, &b), &r) in trace.iter().zip(u).zip(roles) {
        let pb = if b == 1 { p1 } else { 1.0 - p1 };
        p *= pb;
        match r {
            Role::High => {
                q *= 0.5;
                d += 2.0 * (p1 - 0.5).abs();
            }
            Role::Low => {
                let best = argmax([1.0 - p1, p1]);
                q *= (b == best) as u8 as f64;
                d += 2.0 * (1.0 - p1.max(1.0 - p1));
            }
            Role::Random => q *= pb,
        }
    }
    (p, q, d)
}

fn bits_of(value: usize, len: usize) -> Vec<u8> {
    (0..len).map(|i| ((value >> i) & 1) as u8).collect()
}

/// Exact distance between the block law of the encoder (uniform bits on
/// `H`, argmax on `L`, sampling on `R`) and the target block law, by
/// enumerating every `(u_w, u_v, u_x)`.
pub fn exact_block_tv(layered: &LayeredDistribution, sets: &BitChannelSets) -> Result<ExactTv> {
    let len = sets.block_len;
    let n = crate::polar::transform::log2_len(len)?;
    if n > MAX_EXACT_N {
        return Err(Error::OracleTooLarge(n, MAX_EXACT_N));
    }
    let roles = roles_of(sets);
    let tables = Layer::ALL.map(|l| LayerTables::source(l, layered));
    let count = 1usize << len;
    let parts: Vec<(f64, f64)> = (0..count)
        .into_par_iter()
        .map(|a| {
            let mut engine = ScEngine::new(n, 1);
            let uw = bits_of(a, len);
            let (tw, w) = trace_of(&mut engine, &tables[0], None, &uw);
            let (pw, qw, dw) = layer_terms(&tw, &uw, &roles[0]);
            let (mut tv, mut bound) = (0.0, 0.0);
            for b in 0..count {
                let uv = bits_of(b, len);
                let (tv_, v) = trace_of(&mut engine, &tables[1], Some(&w), &uv);
                let (pv, qv, dv) = layer_terms(&tv_, &uv, &roles[1]);
                for c in 0..count {
                    let ux = bits_of(c, len);
                    let (tx, _) = trace_of(&mut engine, &tables[2], Some(&v), &ux);
                    let (px, qx, dx) = layer_terms(&tx, &ux, &roles[2]);
                    let p = pw * pv * px;
                    tv += (p - qw * qv * qx).abs();
                    bound += p * (dw + dv + dx);
                }
            }
            (tv, bound)
        })
        .collect();
    let (tv, bound) = parts.iter().fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    Ok(ExactTv { n, tv: 0.5 * tv, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::noiseless_channel;
    use crate::polar::{exact_layer_stats, RankTargets, SelectionMode};

    fn all_high() -> RankTargets {
        RankTargets {
            high: 1.0,
            low: 0.0,
            receiver_low: [(1, 0.5), (2, 0.5), (3, 0.5)].into_iter().collect(),
            info_within_high: false,
        }
    }

    #[test]
    fn uniform_layers_on_high_positions_are_exact() {
        let layered = LayeredDistribution::from_params(0.5, [0.5, 0.5], [0.5, 0.5]).unwrap();
        let stats = exact_layer_stats(&layered, &noiseless_channel(), 2).unwrap();
        let mode = SelectionMode::Rank {
            targets: [all_high(), all_high(), all_high()],
        };
        let sets = select_sets(&stats, &mode).unwrap();
        let exact = exact_block_tv(&layered, &sets).unwrap();
        assert!(exact.tv.abs() < 1e-12 && exact.bound.abs() < 1e-12, "{exact:?}");
    }

    #[test]
    fn skewed_source_on_high_positions_is_not_exact() {
        let layered = LayeredDistribution::from_params(0.2, [0.5, 0.5], [0.5, 0.5]).unwrap();
        let stats = exact_layer_stats(&layered, &noiseless_channel(), 2).unwrap();
        let mode = SelectionMode::Rank {
            targets: [all_high(), all_high(), all_high()],
        };
        let exact = exact_block_tv(&layered, &select_sets(&stats, &mode).unwrap()).unwrap();
        assert!(exact.tv > 0.01 && exact.within_bound(), "{exact:?}");
    }
}
