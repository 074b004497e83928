//! Capacity region, split region and the constructive rate split.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{induced_output_joints, BroadcastChannel, InducedJoints};
use crate::error::{Error, Result};
use crate::io::stream;
use crate::polar::Layer;
use crate::prob::{
    conditional_mutual_information, mutual_information, JointPmf2, JointPmf3,
    LayeredDistribution,
};

/// Strictness margin used when the caller does not supply one.
pub const DEFAULT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r0: f64,
    pub r1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSplit {
    pub r11: f64,
    pub r12: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInfoProfile {
    pub i_w_y1: f64,
    pub i_w_y2: f64,
    pub i_w_y3: f64,
    pub i_v_y3: f64,
    pub i_v_y1_given_w: f64,
    pub i_x_y1_given_w: f64,
    pub i_x_y1_given_v: f64,
    pub i_x_y1: f64,
}

fn pair_joint(j: &InducedJoints, receiver: u8, pick: impl Fn(usize) -> usize) -> JointPmf2 {
    let (cells, ny) = j.receiver(receiver);
    let mut out = vec![0.0; 2 * ny];
    for s in 0..8 {
        for y in 0..ny {
            out[pick(s) * ny + y] += cells[s * ny + y];
        }
    }
    JointPmf2::new(2, ny, out).expect("marginal of a valid joint")
}

/// Joint of (A, Y, B) with A and B binary functions of the `(w, v, x)` index.
fn triple_joint(
    j: &InducedJoints,
    receiver: u8,
    a: impl Fn(usize) -> usize,
    b: impl Fn(usize) -> usize,
) -> JointPmf3 {
    let (cells, ny) = j.receiver(receiver);
    let mut out = vec![0.0; 2 * ny * 2];
    for s in 0..8 {
        for y in 0..ny {
            out[(a(s) * ny + y) * 2 + b(s)] += cells[s * ny + y];
        }
    }
    JointPmf3::new(2, ny, 2, out).expect("marginal of a valid joint")
}

fn w_of(s: usize) -> usize {
    s >> 2
}
fn v_of(s: usize) -> usize {
    (s >> 1) & 1
}
fn x_of(s: usize) -> usize {
    s & 1
}

pub fn profile(layered: &LayeredDistribution, ch: &BroadcastChannel) -> MutualInfoProfile {
    let j = induced_output_joints(ch, layered);
    MutualInfoProfile {
        i_w_y1: mutual_information(&pair_joint(&j, 1, w_of)),
        i_w_y2: mutual_information(&pair_joint(&j, 2, w_of)),
        i_w_y3: mutual_information(&pair_joint(&j, 3, w_of)),
        i_v_y3: mutual_information(&pair_joint(&j, 3, v_of)),
        i_v_y1_given_w: conditional_mutual_information(&triple_joint(&j, 1, v_of, w_of)),
        i_x_y1_given_w: conditional_mutual_information(&triple_joint(&j, 1, x_of, w_of)),
        i_x_y1_given_v: conditional_mutual_information(&triple_joint(&j, 1, x_of, v_of)),
        i_x_y1: mutual_information(&pair_joint(&j, 1, x_of)),
    }
}

/// Entropy of the key `key(s, y)` under receiver `receiver`'s joint.
fn keyed_entropy(j: &InducedJoints, receiver: u8, keys: usize, key: impl Fn(usize, usize) -> usize) -> f64 {
    let (cells, ny) = j.receiver(receiver);
    let mut m = vec![0.0; keys];
    for s in 0..8 {
        for y in 0..ny {
            m[key(s, y)] += cells[s * ny + y];
        }
    }
    m.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Limiting set fractions of one layer: the source entropy and, per
/// receiver, the entropy left after observing that receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerEntropies {
    pub source: f64,
    pub given_receiver: BTreeMap<u8, f64>,
}

/// `H(W)`, `H(W|Y_j)`; `H(V|W)`, `H(V|W,Y_j)`; `H(X|V)`, `H(X|V,Y_1)`.
pub fn layer_entropies(layered: &LayeredDistribution, ch: &BroadcastChannel) -> [LayerEntropies; 3] {
    let j = induced_output_joints(ch, layered);
    let make = |layer: Layer| {
        // (own symbol, context symbol)
        let (own, ctx): (fn(usize) -> usize, fn(usize) -> usize) = match layer {
            Layer::W => (w_of, |_| 0),
            Layer::V => (v_of, w_of),
            Layer::X => (x_of, v_of),
        };
        let h_joint = keyed_entropy(&j, 1, 4, |s, _| own(s) * 2 + ctx(s));
        let h_ctx = keyed_entropy(&j, 1, 2, |s, _| ctx(s));
        let mut given_receiver = BTreeMap::new();
        for &r in layer.receivers() {
            let ny = j.receiver(r).1;
            let hj = keyed_entropy(&j, r, 4 * ny, |s, y| (own(s) * 2 + ctx(s)) * ny + y);
            let hc = keyed_entropy(&j, r, 2 * ny, |s, y| ctx(s) * ny + y);
            given_receiver.insert(r, (hj - hc).max(0.0));
        }
        LayerEntropies {
            source: (h_joint - h_ctx).max(0.0),
            given_receiver,
        }
    };
    [make(Layer::W), make(Layer::V), make(Layer::X)]
}

/// Membership in the capacity region, with strict inequalities tightened by `slack`.
pub fn in_capacity_region(pair: RatePair, prof: &MutualInfoProfile, slack: f64) -> bool {
    pair.r0 >= 0.0
        && pair.r1 >= 0.0
        && pair.r0 < prof.i_w_y2.min(prof.i_v_y3) - slack
        && pair.r1 < prof.i_x_y1_given_w - slack
        && pair.r0 + pair.r1 < prof.i_v_y3 + prof.i_x_y1_given_v - slack
}

/// Names of the capacity-region inequalities violated by `pair`.
pub fn capacity_violations(pair: RatePair, prof: &MutualInfoProfile, slack: f64) -> Vec<String> {
    let mut out = Vec::new();
    if pair.r0 >= prof.i_w_y2.min(prof.i_v_y3) - slack {
        out.push(format!(
            "public rate {} >= min(I(W;Y2), I(V;Y3)) = {}",
            pair.r0,
            prof.i_w_y2.min(prof.i_v_y3)
        ));
    }
    if pair.r1 >= prof.i_x_y1_given_w - slack {
        out.push(format!(
            "private rate {} >= I(X;Y1|W) = {}",
            pair.r1, prof.i_x_y1_given_w
        ));
    }
    if pair.r0 + pair.r1 >= prof.i_v_y3 + prof.i_x_y1_given_v - slack {
        out.push(format!(
            "sum rate {} >= I(V;Y3) + I(X;Y1|V) = {}",
            pair.r0 + pair.r1,
            prof.i_v_y3 + prof.i_x_y1_given_v
        ));
    }
    if pair.r0 < 0.0 || pair.r1 < 0.0 {
        out.push("negative rate".into());
    }
    out
}

/// The five strict inequalities of the split region.
pub fn in_split_region(r0: f64, r11: f64, r12: f64, prof: &MutualInfoProfile) -> bool {
    r0 >= 0.0
        && r11 >= 0.0
        && r12 >= 0.0
        && r0 < prof.i_w_y2
        && r12 < prof.i_x_y1_given_v
        && r11 + r12 < prof.i_x_y1_given_w
        && r0 + r11 + r12 < prof.i_x_y1
        && r0 + r11 < prof.i_v_y3
}

/// The three conditions a split must meet for the polar construction.
pub fn split_conditions_hold(r0: f64, split: RateSplit, prof: &MutualInfoProfile) -> bool {
    split.r11 >= 0.0
        && split.r12 >= 0.0
        && split.r11 < prof.i_v_y1_given_w
        && split.r12 < prof.i_x_y1_given_v
        && r0 + split.r11 < prof.i_v_y3
}

/// Splits `pair.r1` so that `r11 < I(V;Y1|W)`, `r12 < I(X;Y1|V)` and
/// `r0 + r11 < I(V;Y3)`.
///
/// Starts from the largest `r11` allowed by the first condition; if the
/// third fails by `delta`, moves the midpoint of `(delta, min(r11', delta1))`
/// from `r11` to `r12`.
pub fn constructive_split(pair: RatePair, prof: &MutualInfoProfile, slack: f64) -> Result<RateSplit> {
    if !in_capacity_region(pair, prof, slack) {
        return Err(Error::NotAchievable(capacity_violations(pair, prof, slack).join("; ")));
    }
    let r1 = pair.r1;
    if r1 == 0.0 {
        return Ok(RateSplit { r11: 0.0, r12: 0.0 });
    }
    let mut r11p = r1.min((prof.i_v_y1_given_w - DEFAULT_SLACK).max(0.0));
    if r1 - r11p >= prof.i_x_y1_given_v {
        // the first two conditions leave the open interval (r1 - I(X;Y1|V), I(V;Y1|W))
        let lo = (r1 - prof.i_x_y1_given_v).max(0.0);
        let hi = prof.i_v_y1_given_w.min(r1);
        r11p = 0.5 * (lo + hi);
    }
    let r12p = r1 - r11p;
    let mut split = RateSplit { r11: r11p, r12: r12p };
    if pair.r0 + r11p >= prof.i_v_y3 {
        let delta = pair.r0 + r11p - prof.i_v_y3;
        let delta1 = prof.i_x_y1_given_v - r12p;
        let upper = r11p.min(delta1);
        if upper <= delta {
            return Err(Error::SplitFailed(format!(
                "empty shift interval ({delta}, {upper}) for pair ({}, {})",
                pair.r0, pair.r1
            )));
        }
        let shift = 0.5 * (delta + upper);
        split = RateSplit {
            r11: r11p - shift,
            r12: r12p + shift,
        };
    }
    if !split_conditions_hold(pair.r0, split, prof) {
        return Err(Error::SplitFailed(format!(
            "split ({}, {}) misses a condition for pair ({}, {})",
            split.r11, split.r12, pair.r0, pair.r1
        )));
    }
    Ok(split)
}

/// Splits `pair.r1` to minimise the largest of the loads `r11 / I(V;Y1|W)`,
/// `r12 / I(X;Y1|V)` and `(r0 + r11) / I(V;Y3)`. Fails when the result
/// misses a split condition.
pub fn balanced_split(pair: RatePair, prof: &MutualInfoProfile) -> Result<RateSplit> {
    let (a, b, c) = (prof.i_v_y1_given_w, prof.i_x_y1_given_v, prof.i_v_y3);
    let r1 = pair.r1;
    if r1 <= 0.0 {
        return Ok(RateSplit { r11: 0.0, r12: 0.0 });
    }
    // the decreasing load r12 / b meets each increasing one at these points
    let meet_a = if a + b > 0.0 { r1 * a / (a + b) } else { 0.0 };
    let meet_c = if b + c > 0.0 { (r1 * c - pair.r0 * b) / (b + c) } else { 0.0 };
    let r11 = meet_a.min(meet_c).clamp(0.0, r1);
    let split = RateSplit { r11, r12: r1 - r11 };
    if !split_conditions_hold(pair.r0, split, prof) {
        return Err(Error::SplitFailed(format!(
            "balanced split ({}, {}) misses a condition for pair ({}, {})",
            split.r11, split.r12, pair.r0, pair.r1
        )));
    }
    Ok(split)
}

/// Largest public rate and the private rate at that corner.
pub fn region_corner(prof: &MutualInfoProfile) -> RatePair {
    let r0 = prof.i_w_y2.min(prof.i_v_y3);
    let r1 = prof
        .i_x_y1_given_w
        .min(prof.i_v_y3 + prof.i_x_y1_given_v - r0)
        .max(0.0);
    RatePair { r0, r1 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmReport {
    pub trials: usize,
    /// Sampled pairs inside the capacity region (with slack).
    pub inside_pairs: usize,
    /// Inside pairs for which no valid split exists.
    pub missing_split: usize,
    /// Sampled triples inside the split region.
    pub inside_triples: usize,
    /// Inside triples whose projection leaves the capacity region.
    pub bad_projection: usize,
    pub counterexample: Option<String>,
}

impl FmReport {
    pub fn counterexamples(&self) -> usize {
        self.missing_split + self.bad_projection
    }
}

/// Open interval of `r11` values that put `(r0, r11, r1 - r11)` in the split
/// region, if any. `r11` is also bounded to `[0, r1]`.
pub fn split_interval(pair: RatePair, prof: &MutualInfoProfile) -> Option<(f64, f64)> {
    if !(pair.r0 < prof.i_w_y2
        && pair.r1 < prof.i_x_y1_given_w
        && pair.r0 + pair.r1 < prof.i_x_y1)
    {
        return None;
    }
    // strict: r11 > r1 - I(X;Y1|V) and r11 < I(V;Y3) - r0, closed at 0 and r1
    let lo = pair.r1 - prof.i_x_y1_given_v;
    let hi = prof.i_v_y3 - pair.r0;
    let (a, b) = (lo.max(0.0), hi.min(pair.r1));
    let (a_open, b_open) = (lo >= 0.0, hi <= pair.r1);
    (a < b || (a == b && !a_open && !b_open)).then_some((a, b))
}

pub fn fm_equivalence_check(prof: &MutualInfoProfile, trials: usize, seed: u64, slack: f64) -> FmReport {
    let mut rng = stream(seed, 0);
    let r0_max = 1.1 * prof.i_w_y2.max(prof.i_v_y3).max(1e-6);
    let r1_max = 1.1 * prof.i_x_y1_given_w.max(1e-6);
    let mut rep = FmReport {
        trials,
        inside_pairs: 0,
        missing_split: 0,
        inside_triples: 0,
        bad_projection: 0,
        counterexample: None,
    };
    for _ in 0..trials {
        let pair = RatePair {
            r0: rng.gen::<f64>() * r0_max,
            r1: rng.gen::<f64>() * r1_max,
        };
        if slack > 0.0 && in_capacity_region(pair, prof, slack) {
            rep.inside_pairs += 1;
            let found = split_interval(pair, prof).is_some_and(|(lo, hi)| {
                let mid = 0.5 * (lo + hi);
                in_split_region(pair.r0, mid, pair.r1 - mid, prof)
            });
            if !found {
                rep.missing_split += 1;
                rep.counterexample
                    .get_or_insert_with(|| format!("no split for ({}, {})", pair.r0, pair.r1));
            }
        }
        let r0 = rng.gen::<f64>() * r0_max;
        let r11 = rng.gen::<f64>() * r1_max;
        let r12 = rng.gen::<f64>() * r1_max;
        if in_split_region(r0, r11, r12, prof) {
            rep.inside_triples += 1;
            if !in_capacity_region(RatePair { r0, r1: r11 + r12 }, prof, 0.0) {
                rep.bad_projection += 1;
                rep.counterexample
                    .get_or_insert_with(|| format!("({r0}, {r11}, {r12}) projects outside"));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{bsc_channel, noiseless_channel};

    fn sample_profile() -> MutualInfoProfile {
        let layered = LayeredDistribution::from_params(0.5, [0.2, 0.8], [0.15, 0.85]).unwrap();
        profile(&layered, &bsc_channel(0.05, 0.3, 0.2).unwrap())
    }

    #[test]
    fn constant_auxiliaries() {
        let layered = LayeredDistribution::from_params(0.0, [0.0, 0.0], [0.3, 0.3]).unwrap();
        let p = profile(&layered, &bsc_channel(0.1, 0.2, 0.1).unwrap());
        assert!(p.i_w_y1.abs() < 1e-12);
        assert!(p.i_v_y3.abs() < 1e-12);
        assert!(p.i_v_y1_given_w.abs() < 1e-12);
        assert!(p.i_x_y1 > 0.0);
    }

    #[test]
    fn noiseless_identity_layers() {
        let layered = LayeredDistribution::from_params(0.5, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let p = profile(&layered, &noiseless_channel());
        assert!((p.i_w_y2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_rule_holds() {
        let p = sample_profile();
        assert!((p.i_v_y1_given_w + p.i_x_y1_given_v - p.i_x_y1_given_w).abs() < 1e-10);
        assert!(p.i_w_y2 <= p.i_w_y1 + 1e-12);
    }

    #[test]
    fn capacity_region_boundaries() {
        let p = sample_profile();
        assert!(in_capacity_region(RatePair { r0: 0.0, r1: 0.0 }, &p, 0.0));
        let edge = RatePair { r0: p.i_w_y2.min(p.i_v_y3), r1: 0.0 };
        assert!(!in_capacity_region(edge, &p, 0.0));
    }

    #[test]
    fn split_region_boundary() {
        let p = sample_profile();
        assert!(in_split_region(0.0, 0.0, 0.0, &p));
        assert!(!in_split_region(0.0, p.i_v_y3, 0.0, &p));
    }

    #[test]
    fn zero_private_rate_splits_to_zero() {
        let p = sample_profile();
        let s = constructive_split(RatePair { r0: 0.01, r1: 0.0 }, &p, DEFAULT_SLACK).unwrap();
        assert_eq!(s, RateSplit { r11: 0.0, r12: 0.0 });
    }

    #[test]
    fn first_branch_is_kept() {
        let p = sample_profile();
        let r1 = 0.5 * p.i_v_y1_given_w.min(p.i_v_y3);
        let s = constructive_split(RatePair { r0: 0.0, r1 }, &p, DEFAULT_SLACK).unwrap();
        assert_eq!(s, RateSplit { r11: r1, r12: 0.0 });
    }

    #[test]
    fn outside_pair_is_refused() {
        let p = sample_profile();
        let bad = RatePair { r0: 0.0, r1: p.i_x_y1_given_w + 0.01 };
        assert!(matches!(constructive_split(bad, &p, DEFAULT_SLACK), Err(Error::NotAchievable(_))));
    }

    #[test]
    fn layer_entropies_match_profile() {
        let layered = LayeredDistribution::from_params(0.4, [0.2, 0.8], [0.15, 0.85]).unwrap();
        let ch = bsc_channel(0.05, 0.3, 0.2).unwrap();
        let e = layer_entropies(&layered, &ch);
        let p = profile(&layered, &ch);
        assert!((e[0].source - e[0].given_receiver[&3] - p.i_w_y3).abs() < 1e-12);
        assert!((e[2].source - e[2].given_receiver[&1] - p.i_x_y1_given_v).abs() < 1e-12);
        assert!((e[1].source - e[1].given_receiver[&1] - p.i_v_y1_given_w).abs() < 1e-12);
    }
}
