//! Allocation of message bits to index sets across `k` chained blocks.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::{BitChannelSets, Layer};
use crate::region::RateSplit;

/// Which allocation is active.
///
/// * `A1`: public bits spill into the V layer and the V-layer private bits
///   need a second chaining level.
/// * `A2`: public bits spill into the V layer; the V-layer private bits fit
///   in positions both receiver 1 and receiver 3 can read.
/// * `B1`: public bits fit in the W layer, chained within that layer.
/// * `B2`: no chaining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    A1,
    A2,
    B1,
    B2,
}

impl CaseTag {
    pub const ALL: [CaseTag; 4] = [CaseTag::A1, CaseTag::A2, CaseTag::B1, CaseTag::B2];

    /// Public bits live partly in the V layer, so receiver 3 decodes it.
    pub fn uses_v_for_public(self) -> bool {
        matches!(self, CaseTag::A1 | CaseTag::A2)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseTag::A1 => "A1",
            CaseTag::A2 => "A2",
            CaseTag::B1 => "B1",
            CaseTag::B2 => "B2",
        };
        f.write_str(s)
    }
}

/// Per-block bit counts `floor(N r0)`, `floor(N r11)`, `floor(N r12)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitCounts {
    pub public: usize,
    pub v_private: usize,
    pub x_private: usize,
}

impl BitCounts {
    pub fn from_rates(block_len: usize, r0: f64, split: RateSplit) -> Self {
        // the small epsilon keeps exact products such as 0.25 * 16 from
        // rounding down
        let f = |r: f64| (r.max(0.0) * block_len as f64 + 1e-9).floor() as usize;
        Self {
            public: f(r0),
            v_private: f(split.r11),
            x_private: f(split.r12),
        }
    }

    pub fn zero() -> Self {
        Self {
            public: 0,
            v_private: 0,
            x_private: 0,
        }
    }
}

/// Message bit totals over all `k` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub public_total: usize,
    pub private_total: usize,
    pub case_tag: CaseTag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WPartitions {
    /// Read by receivers 2 and 3; public bits in every block.
    pub i3_and_i2: Vec<usize>,
    /// Read by receiver 3 only.
    pub i3_and_f2: Vec<usize>,
    /// Link destinations inside `I2w ∩ F3w`.
    pub bw1: Vec<usize>,
    /// The rest of `I2w ∩ F3w`.
    pub bw2: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VPartitions {
    /// Public bits carried by the V layer.
    pub i31: Vec<usize>,
    /// `I3v` minus `i31`.
    pub i32: Vec<usize>,
    /// Private bits read by receiver 3 and forwarded to receiver 1 by the
    /// next block.
    pub i321: Vec<usize>,
    pub i322: Vec<usize>,
    /// `(I1v ∩ I3v)` minus any public overflow.
    pub i1_and_i3: Vec<usize>,
    /// Link destinations inside `I1v ∩ F3v`.
    pub i11: Vec<usize>,
    pub i12: Vec<usize>,
}

/// Values at `sources` in block `t` are copied to `dests` in block `t + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyLink {
    pub sources: Vec<(Layer, usize)>,
    pub dests: Vec<(Layer, usize)>,
}

/// One message bit position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub block: usize,
    pub layer: Layer,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainingLayout {
    pub case_tag: CaseTag,
    pub k: usize,
    pub counts: BitCounts,
    pub w: WPartitions,
    pub v: VPartitions,
    pub x_message: Vec<usize>,
    /// Public positions used in every block.
    pub public_every_block: Vec<(Layer, usize)>,
    /// Public positions used in blocks `1..k-1` only (the last block freezes
    /// them since nothing follows to carry them forward).
    pub public_chained: Vec<(Layer, usize)>,
    pub private_every_block: Vec<(Layer, usize)>,
    pub private_chained: Vec<(Layer, usize)>,
    pub copy_links: Vec<CopyLink>,
}

fn slots(
    k: usize,
    every: &[(Layer, usize)],
    chained: &[(Layer, usize)],
) -> Vec<Slot> {
    let mut out = Vec::new();
    for block in 0..k {
        let chain = if block + 1 < k { chained } else { &[] };
        for &(layer, index) in every.iter().chain(chain) {
            out.push(Slot { block, layer, index });
        }
    }
    out
}

impl ChainingLayout {
    /// Message bit totals from the per-case closed forms.
    pub fn budget(&self) -> Budget {
        let k = self.k;
        let c = self.counts;
        let a = self.w.i3_and_i2.len();
        let chained_public = k.saturating_sub(1) * c.public + a;
        let (public_total, private_total) = match self.case_tag {
            CaseTag::A1 => (
                chained_public,
                k.saturating_sub(1) * c.v_private + self.v.i1_and_i3.len() + k * c.x_private,
            ),
            CaseTag::A2 | CaseTag::B1 => (chained_public, k * (c.v_private + c.x_private)),
            CaseTag::B2 => (k * c.public, k * (c.v_private + c.x_private)),
        };
        Budget {
            public_total,
            private_total,
            case_tag: self.case_tag,
        }
    }

    /// Public message positions in the order message bits are assigned.
    pub fn public_slots(&self) -> Vec<Slot> {
        slots(self.k, &self.public_every_block, &self.public_chained)
    }

    pub fn private_slots(&self) -> Vec<Slot> {
        slots(self.k, &self.private_every_block, &self.private_chained)
    }

    /// Positions of `layer` in `block` whose value arrives over a link.
    pub fn link_destinations(&self, block: usize, layer: Layer) -> Vec<usize> {
        if block == 0 {
            return Vec::new();
        }
        let mut out: Vec<usize> = self
            .copy_links
            .iter()
            .flat_map(|l| l.dests.iter())
            .filter(|(l, _)| *l == layer)
            .map(|&(_, i)| i)
            .collect();
        out.sort_unstable();
        out
    }

    /// Positions of `layer` in `block` that carry message bits.
    pub fn message_positions(&self, block: usize, layer: Layer) -> Vec<usize> {
        let last = block + 1 == self.k;
        let mut out: Vec<usize> = [
            &self.public_every_block,
            &self.private_every_block,
        ]
        .into_iter()
        .chain((!last).then_some(&self.public_chained))
        .chain((!last).then_some(&self.private_chained))
        .flat_map(|v| v.iter())
        .filter(|(l, _)| *l == layer)
        .map(|&(_, i)| i)
        .collect();
        out.sort_unstable();
        out
    }
}

fn set(v: &[usize]) -> BTreeSet<usize> {
    v.iter().copied().collect()
}

fn inter(a: &[usize], b: &[usize]) -> Vec<usize> {
    let b = set(b);
    a.iter().copied().filter(|i| b.contains(i)).collect()
}

fn minus(a: &[usize], b: &[usize]) -> Vec<usize> {
    let b = set(b);
    a.iter().copied().filter(|i| !b.contains(i)).collect()
}

fn tagged(layer: Layer, v: &[usize]) -> Vec<(Layer, usize)> {
    v.iter().map(|&i| (layer, i)).collect()
}

fn need(what: &str, wanted: usize, available: usize) -> std::result::Result<(), String> {
    if wanted > available {
        Err(format!("{what}: need {wanted} positions, only {available} available"))
    } else {
        Ok(())
    }
}

/// Builds the layout, or names the first cardinality inequality that fails.
fn plan(sets: &BitChannelSets, counts: BitCounts, k: usize) -> std::result::Result<ChainingLayout, String> {
    let w = sets.layer(Layer::W);
    let v = sets.layer(Layer::V);
    let x = sets.layer(Layer::X);
    let (i2w, f2w) = (&w.receiver(2).info, &w.receiver(2).frozen);
    let (i3w, f3w) = (&w.receiver(3).info, &w.receiver(3).frozen);
    let (i1v, f1v) = (&v.receiver(1).info, &v.receiver(1).frozen);
    let (i3v, f3v) = (&v.receiver(3).info, &v.receiver(3).frozen);
    let i1x = &x.receiver(1).info;

    let n0 = counts.public;
    let n11 = counts.v_private;
    let n12 = counts.x_private;

    need("X-layer private bits in I1x", n12, i1x.len())?;
    let x_message = i1x[..n12].to_vec();

    let a = inter(i3w, i2w);
    let c = inter(i3w, f2w);
    let d = inter(i2w, f3w);

    let mut w_parts = WPartitions::default();
    let mut v_parts = VPartitions::default();
    let mut links = Vec::new();
    let (public_every, public_chained, private_every, private_chained, case_tag);

    if n0 > i3w.len() {
        let spill = n0 - i3w.len();
        need("public bits spilling into I3v", spill, i3v.len())?;
        let first = inter(i3v, f1v);
        let overflow = inter(i3v, i1v);
        let mut i31: Vec<usize> = first.iter().chain(&overflow).copied().take(spill).collect();
        i31.sort_unstable();
        need("chained public bits in I2w ∩ F3w", n0 - a.len(), d.len())?;
        let bw1 = d[..n0 - a.len()].to_vec();
        let d_prime = minus(&inter(i1v, i3v), &i31);
        let i32 = minus(i3v, &i31);

        let mut w_src = tagged(Layer::W, &c);
        w_src.extend(tagged(Layer::V, &i31));
        links.push(CopyLink {
            sources: w_src,
            dests: tagged(Layer::W, &bw1),
        });

        public_every = tagged(Layer::W, &a);
        let mut pc = tagged(Layer::W, &c);
        pc.extend(tagged(Layer::V, &i31));
        public_chained = pc;

        let i1_f3 = inter(i1v, f3v);
        if n11 > d_prime.len() {
            let m = n11 - d_prime.len();
            let pool = inter(&i32, f1v);
            need("forwarded private bits in (I3v \\ I31v) ∩ F1v", m, pool.len())?;
            need("second-level link destinations in I1v ∩ F3v", m, i1_f3.len())?;
            let i321 = pool[..m].to_vec();
            let i11 = i1_f3[..m].to_vec();
            links.push(CopyLink {
                sources: tagged(Layer::V, &i321),
                dests: tagged(Layer::V, &i11),
            });
            let mut pe = tagged(Layer::V, &d_prime);
            pe.extend(tagged(Layer::X, &x_message));
            private_every = pe;
            private_chained = tagged(Layer::V, &i321);
            v_parts.i322 = minus(&minus(&i32, &i321), &d_prime);
            v_parts.i12 = minus(&i1_f3, &i11);
            v_parts.i321 = i321;
            v_parts.i11 = i11;
            case_tag = CaseTag::A1;
        } else {
            let mut pe = tagged(Layer::V, &d_prime[..n11]);
            pe.extend(tagged(Layer::X, &x_message));
            private_every = pe;
            private_chained = Vec::new();
            v_parts.i322 = minus(&i32, &d_prime);
            v_parts.i12 = i1_f3;
            case_tag = CaseTag::A2;
        }
        w_parts.bw2 = d[bw1.len()..].to_vec();
        w_parts.bw1 = bw1;
        v_parts.i31 = i31;
        v_parts.i32 = i32;
        v_parts.i1_and_i3 = d_prime;
    } else {
        need("V-layer private bits in I1v", n11, i1v.len())?;
        let mut pe = tagged(Layer::V, &i1v[..n11]);
        pe.extend(tagged(Layer::X, &x_message));
        private_every = pe;
        private_chained = Vec::new();
        if n0 > a.len() {
            let m = n0 - a.len();
            need("chained public bits in I2w ∩ F3w", m, d.len())?;
            let c_prime = c[..m].to_vec();
            let bw1 = d[..m].to_vec();
            links.push(CopyLink {
                sources: tagged(Layer::W, &c_prime),
                dests: tagged(Layer::W, &bw1),
            });
            public_every = tagged(Layer::W, &a);
            public_chained = tagged(Layer::W, &c_prime);
            w_parts.bw2 = d[m..].to_vec();
            w_parts.bw1 = bw1;
            case_tag = CaseTag::B1;
        } else {
            public_every = tagged(Layer::W, &a[..n0]);
            public_chained = Vec::new();
            case_tag = CaseTag::B2;
        }
    }
    w_parts.i3_and_i2 = a;
    w_parts.i3_and_f2 = c;
    if k <= 1 {
        links.clear();
    }
    Ok(ChainingLayout {
        case_tag,
        k,
        counts,
        w: w_parts,
        v: v_parts,
        x_message,
        public_every_block: public_every,
        public_chained,
        private_every_block: private_every,
        private_chained,
        copy_links: links,
    })
}

/// Builds the layout for explicit per-block bit counts.
pub fn build_layout(sets: &BitChannelSets, counts: BitCounts, k: usize) -> Result<ChainingLayout> {
    if k == 0 {
        return Err(Error::Config("block count k must be at least 1".into()));
    }
    plan(sets, counts, k).map_err(|violated| Error::BackoffRequired {
        violated,
        max_factor: max_feasible_factor(sets, counts, k),
    })
}

/// Largest `f` in `[0, 1]` such that the counts scaled by `f` fit, by
/// bisection. Feasibility need not be monotone in `f`; the result is the
/// boundary the bisection lands on.
fn max_feasible_factor(sets: &BitChannelSets, counts: BitCounts, k: usize) -> f64 {
    let scaled = |f: f64| BitCounts {
        public: (counts.public as f64 * f).floor() as usize,
        v_private: (counts.v_private as f64 * f).floor() as usize,
        x_private: (counts.x_private as f64 * f).floor() as usize,
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if plan(sets, scaled(hi), k).is_ok() {
        return 1.0;
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if plan(sets, scaled(mid), k).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Layout for a rate pair, with optional automatic backoff.
///
/// Returns the layout and the factor applied to `(r0, r11, r12)`.
pub fn layout_for_rates(
    sets: &BitChannelSets,
    r0: f64,
    split: RateSplit,
    k: usize,
    backoff: bool,
) -> Result<(ChainingLayout, f64)> {
    let len = sets.block_len;
    let counts = BitCounts::from_rates(len, r0, split);
    match build_layout(sets, counts, k) {
        Ok(l) => Ok((l, 1.0)),
        Err(Error::BackoffRequired { violated, .. }) => {
            let feasible = |f: f64| {
                let s = RateSplit {
                    r11: split.r11 * f,
                    r12: split.r12 * f,
                };
                plan(sets, BitCounts::from_rates(len, r0 * f, s), k).ok()
            };
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if feasible(mid).is_some() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            match (backoff, feasible(lo)) {
                (true, Some(layout)) => Ok((layout, lo)),
                _ => Err(Error::BackoffRequired {
                    violated,
                    max_factor: lo,
                }),
            }
        }
        Err(e) => Err(e),
    }
}

/// Totals and case for a rate pair at block length `sets.block_len`.
pub fn message_bit_budget(sets: &BitChannelSets, split: RateSplit, r0: f64, k: usize) -> Result<Budget> {
    let counts = BitCounts::from_rates(sets.block_len, r0, split);
    Ok(build_layout(sets, counts, k)?.budget())
}
