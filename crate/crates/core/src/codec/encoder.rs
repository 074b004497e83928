//! Randomized SC encoding of one layer and of a whole chain of blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::{Layer, LayerSets, LayerTables, Pair, ScEngine};

use super::instance::CodeInstance;
use super::randomness::{BitSampler, CommonRandomness};

/// How the encoder fills a position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// Taken from the message, a link or the frozen table.
    High,
    /// Argmax of the conditional law, ties to 0.
    Low,
    /// Sampled from the conditional law.
    Random,
}

pub fn layer_roles(sets: &LayerSets, len: usize) -> Vec<Role> {
    let mut roles = vec![Role::Random; len];
    for &i in &sets.high {
        roles[i] = Role::High;
    }
    for &i in &sets.low {
        roles[i] = Role::Low;
    }
    roles
}

/// Relative margin below which the two sides count as tied. Exact ties
/// occur by symmetry, and rounding in the SC recursion would otherwise break
/// them either way.
const TIE_MARGIN: f64 = 1e-9;

#[inline]
pub(crate) fn argmax(p: Pair) -> u8 {
    (p[1] - p[0] > TIE_MARGIN * (p[0] + p[1])) as u8
}

/// Everything that fixes one layer of one block, apart from the sampler.
pub struct LayerJob<'a> {
    pub block: usize,
    pub layer: Layer,
    /// Source-side tables of the layer.
    pub tables: &'a LayerTables,
    /// The transformed lower layer (`w` for V, `v` for X).
    pub context: Option<&'a [u8]>,
    pub roles: &'a [Role],
    /// Values used at `High` positions; other entries are ignored.
    pub assignments: &'a [u8],
}

/// Encodes one layer. Returns `(u, u G_N)`. When `trace` is given it
/// receives `P(u_i = 1 | past, context)` for every `i`.
pub fn sc_encode_layer(
    engine: &mut ScEngine,
    job: &LayerJob<'_>,
    sampler: &mut dyn BitSampler,
    mut trace: Option<&mut Vec<f64>>,
) -> (Vec<u8>, Vec<u8>) {
    let len = engine.block_len();
    let mut leaves = vec![[0.0; 2]; len];
    job.tables.fill(job.context, None, &mut leaves);
    if let Some(t) = trace.as_deref_mut() {
        t.clear();
    }
    let mut u = vec![0u8; len];
    let x = engine
        .run(&leaves, |i, pairs| {
            let p = pairs[0];
            if let Some(t) = trace.as_deref_mut() {
                t.push(p[1]);
            }
            let b = match job.roles[i] {
                Role::High => job.assignments[i] & 1,
                Role::Low => argmax(p),
                Role::Random => sampler.sample(job.block, job.layer, i, p[1]),
            };
            u[i] = b;
            b
        })
        .to_vec();
    (u, x)
}

/// The u-vectors and transformed sequences of one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockVectors {
    pub u_w: Vec<u8>,
    pub w: Vec<u8>,
    pub u_v: Vec<u8>,
    pub v: Vec<u8>,
    pub u_x: Vec<u8>,
    pub x: Vec<u8>,
}

impl BlockVectors {
    pub fn u(&self, layer: Layer) -> &[u8] {
        match layer {
            Layer::W => &self.u_w,
            Layer::V => &self.u_v,
            Layer::X => &self.u_x,
        }
    }
}

/// Encodes all `k` blocks with the instance's common randomness.
pub fn encode_chain(inst: &CodeInstance, public: &[u8], private: &[u8]) -> Result<Vec<BlockVectors>> {
    let mut cr = CommonRandomness::new(inst.common_randomness_seed);
    encode_chain_with(inst, public, private, &mut cr)
}

/// Encodes all `k` blocks, drawing unpolarized positions from `sampler`.
pub fn encode_chain_with(
    inst: &CodeInstance,
    public: &[u8],
    private: &[u8],
    sampler: &mut dyn BitSampler,
) -> Result<Vec<BlockVectors>> {
    let budget = inst.budget;
    if public.len() != budget.public_total || private.len() != budget.private_total {
        return Err(Error::MessageLength(format!(
            "expected {} public and {} private bits, got {} and {}",
            budget.public_total,
            budget.private_total,
            public.len(),
            private.len()
        )));
    }
    let len = inst.block_len();
    let k = inst.k;
    let roles = inst.roles();
    let tables = Layer::ALL.map(|l| LayerTables::source(l, &inst.layered));

    // H-position assignments per block and layer
    let mut assign: Vec<[Vec<u8>; 3]> = (0..k)
        .map(|t| {
            Layer::ALL.map(|l| {
                let mut a = vec![0u8; len];
                let f = &inst.frozen[t][l.index()];
                for (&i, &b) in f.positions.iter().zip(&f.bits) {
                    a[i] = b;
                }
                a
            })
        })
        .collect();
    for (slot, &b) in inst.layout.public_slots().iter().zip(public) {
        assign[slot.block][slot.layer.index()][slot.index] = b & 1;
    }
    for (slot, &b) in inst.layout.private_slots().iter().zip(private) {
        assign[slot.block][slot.layer.index()][slot.index] = b & 1;
    }
    for t in 1..k {
        for link in &inst.layout.copy_links {
            for (&(sl, si), &(dl, di)) in link.sources.iter().zip(&link.dests) {
                assign[t][dl.index()][di] = assign[t - 1][sl.index()][si];
            }
        }
    }

    let mut engine = ScEngine::new(inst.n, 1);
    let mut out = Vec::with_capacity(k);
    for (t, a) in assign.iter().enumerate() {
        let mut run = |layer: Layer, context: Option<&[u8]>| {
            let job = LayerJob {
                block: t,
                layer,
                tables: &tables[layer.index()],
                context,
                roles: &roles[layer.index()],
                assignments: &a[layer.index()],
            };
            sc_encode_layer(&mut engine, &job, sampler, None)
        };
        let (u_w, w) = run(Layer::W, None);
        let (u_v, v) = run(Layer::V, Some(&w));
        let (u_x, x) = run(Layer::X, Some(&v));
        out.push(BlockVectors {
            u_w,
            w,
            u_v,
            v,
            u_x,
            x,
        });
    }
    Ok(out)
}
