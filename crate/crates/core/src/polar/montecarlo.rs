//! Plug-in estimation of bit-channel Bhattacharyya parameters.
//!
//! Each sample draws `(W, V, X, Y1, Y2, Y3)` blocks from the true model and
//! runs one SC pass per layer that follows the true u-bits, recording
//! `2 sqrt(P(0 | ...) P(1 | ...))` at every position on every track.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::BroadcastChannel;
use crate::io::stream;
use crate::prob::LayeredDistribution;

use super::model::{Layer, LayerTables};
use super::sc::{Pair, ScEngine};
use super::stats::{BitChannelStats, Estimation, LayerStats};
use super::transform::polar_transform;

/// Work is split into this many fixed chunks, each with its own stream, so
/// results do not depend on the thread count.
const CHUNKS: u64 = 64;

struct LayerJob {
    layer: Layer,
    /// Source tables first, then one per receiver in `layer.receivers()` order.
    tables: Vec<LayerTables>,
}

#[derive(Clone)]
struct Sums {
    sum: Vec<Vec<f64>>,
    sq: Vec<Vec<f64>>,
}

impl Sums {
    fn new(tracks: usize, len: usize) -> Self {
        Self {
            sum: vec![vec![0.0; len]; tracks],
            sq: vec![vec![0.0; len]; tracks],
        }
    }

    fn add(&mut self, other: &Sums) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        for (a, b) in self.sq.iter_mut().zip(&other.sq) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

/// Draws one i.i.d. block of `(w, v, x)`.
pub fn sample_wvx<R: Rng + ?Sized>(
    layered: &LayeredDistribution,
    len: usize,
    rng: &mut R,
) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let mut w = Vec::with_capacity(len);
    let mut v = Vec::with_capacity(len);
    let mut x = Vec::with_capacity(len);
    for _ in 0..len {
        let wi = (rng.gen::<f64>() < layered.pw.p(1)) as u8;
        let vi = (rng.gen::<f64>() < layered.pv_given_w.p(wi as usize, 1)) as u8;
        let xi = (rng.gen::<f64>() < layered.px_given_v.p(vi as usize, 1)) as u8;
        w.push(wi);
        v.push(vi);
        x.push(xi);
    }
    (w, v, x)
}

pub fn monte_carlo_layer_stats(
    layered: &LayeredDistribution,
    ch: &BroadcastChannel,
    n: u32,
    samples: u64,
    seed: u64,
) -> LayerStats {
    let len = 1usize << n;
    let jobs: Vec<LayerJob> = Layer::ALL
        .iter()
        .map(|&layer| {
            let mut tables = vec![LayerTables::source(layer, layered)];
            for &j in layer.receivers() {
                tables.push(LayerTables::with_receiver(layer, layered, ch, j));
            }
            LayerJob { layer, tables }
        })
        .collect();

    let per_chunk: Vec<[Sums; 3]> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let lo = samples * c / CHUNKS;
            let hi = samples * (c + 1) / CHUNKS;
            run_chunk(&jobs, layered, ch, n, hi - lo, seed, c)
        })
        .collect();

    let mut total: [Sums; 3] = [0, 1, 2].map(|l| Sums::new(jobs[l].tables.len(), len));
    for chunk in &per_chunk {
        for l in 0..3 {
            total[l].add(&chunk[l]);
        }
    }

    let s = samples.max(1) as f64;
    let summarize = |sum: &[f64], sq: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mean: Vec<f64> = sum.iter().map(|v| v / s).collect();
        let se = mean
            .iter()
            .zip(sq)
            .map(|(m, q)| {
                let var = (q / s - m * m).max(0.0) * s / (s - 1.0).max(1.0);
                (var / s).sqrt()
            })
            .collect();
        (mean.iter().map(|m| m.clamp(0.0, 1.0)).collect(), se)
    };

    let build = |l: usize| {
        let job = &jobs[l];
        let (z_source, se_source) = summarize(&total[l].sum[0], &total[l].sq[0]);
        let mut z_receiver = BTreeMap::new();
        let mut se_receiver = BTreeMap::new();
        for (t, &j) in job.layer.receivers().iter().enumerate() {
            let (z, se) = summarize(&total[l].sum[t + 1], &total[l].sq[t + 1]);
            z_receiver.insert(j, z);
            se_receiver.insert(j, se);
        }
        BitChannelStats {
            layer: job.layer,
            z_source,
            z_receiver,
            estimation: Estimation::MonteCarlo,
            sample_count: samples,
            se_source,
            se_receiver,
            h_source: Vec::new(),
            h_receiver: BTreeMap::new(),
        }
    };
    [build(0), build(1), build(2)]
}

fn run_chunk(
    jobs: &[LayerJob],
    layered: &LayeredDistribution,
    ch: &BroadcastChannel,
    n: u32,
    count: u64,
    seed: u64,
    chunk: u64,
) -> [Sums; 3] {
    let len = 1usize << n;
    let mut rng = stream(seed, chunk);
    let mut sums: [Sums; 3] = [0, 1, 2].map(|l| Sums::new(jobs[l].tables.len(), len));
    let mut engines: Vec<ScEngine> = jobs
        .iter()
        .map(|j| ScEngine::new(n, j.tables.len()))
        .collect();
    let mut leaves: Vec<Vec<Pair>> = jobs
        .iter()
        .map(|j| vec![[0.0, 0.0]; j.tables.len() * len])
        .collect();

    for _ in 0..count {
        let (w, v, x) = sample_wvx(layered, len, &mut rng);
        let y = ch.transmit(&x, &mut rng);
        for (l, job) in jobs.iter().enumerate() {
            let (context, own): (Option<&[u8]>, &[u8]) = match job.layer {
                Layer::W => (None, &w),
                Layer::V => (Some(&w), &v),
                Layer::X => (Some(&v), &x),
            };
            let u = polar_transform(own).expect("block length is a power of two");
            let buf = &mut leaves[l];
            job.tables[0].fill(context, None, &mut buf[..len]);
            for (t, &j) in job.layer.receivers().iter().enumerate() {
                let row = &mut buf[(t + 1) * len..(t + 2) * len];
                job.tables[t + 1].fill(context, Some(y.for_receiver(j)), row);
            }
            let acc = &mut sums[l];
            engines[l].run(buf, |i, pairs| {
                for (t, p) in pairs.iter().enumerate() {
                    let z = 2.0 * (p[0] * p[1]).sqrt();
                    acc.sum[t][i] += z;
                    acc.sq[t][i] += z * z;
                }
                u[i]
            });
        }
    }
    sums
}
