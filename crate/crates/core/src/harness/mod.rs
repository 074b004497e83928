//! Monte Carlo campaigns: error rates, encoder output distance, region
//! sweeps and the property checks behind `verify`.

pub mod error_rate;
pub mod region_sweep;
pub mod tv;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::channel::BroadcastChannel;
use crate::codec::{ConstructionParams, SelectionSpec};
use crate::error::{Error, Result};
use crate::prob::LayeredDistribution;
use crate::region::{balanced_split, capacity_violations, in_capacity_region, constructive_split, profile, region_corner, RatePair, RateSplit, DEFAULT_SLACK};

pub use error_rate::{run_error_rate, ErrorRateReport, PointRecord, ReceiverTally};
pub use region_sweep::{pareto_frontier, sweep_region, RegionPoint};
pub use tv::{exact_block_tv, run_tv_trend, ExactTv, TvConfig, TvPoint, TvReport};
pub use verify::{run_verify, CheckResult, VerifyConfig, VerifyReport};

/// Requested rates: explicit, or a fraction of the largest-public corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum RateSpec {
    Explicit { r0: f64, r1: f64 },
    CornerFraction { corner_fraction: f64 },
}

impl RateSpec {
    pub fn resolve(&self, layered: &LayeredDistribution, ch: &BroadcastChannel) -> Result<RatePair> {
        match *self {
            RateSpec::Explicit { r0, r1 } => {
                if !(r0 >= 0.0 && r1 >= 0.0 && r0.is_finite() && r1.is_finite()) {
                    return Err(Error::Config(format!("rates must be non-negative, got ({r0}, {r1})")));
                }
                Ok(RatePair { r0, r1 })
            }
            RateSpec::CornerFraction { corner_fraction: f } => {
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::Config(format!("corner fraction {f} outside [0, 1]")));
                }
                let c = region_corner(&profile(layered, ch));
                Ok(RatePair { r0: f * c.r0, r1: f * c.r1 })
            }
        }
    }
}

/// How the private rate is divided between the V and X layers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SplitPolicy {
    /// The constructive split that fills the V layer first.
    #[default]
    Constructive,
    /// Equal load on every decoding constraint.
    Balanced,
    Explicit { r11: f64, r12: f64 },
}

impl SplitPolicy {
    pub fn resolve(
        &self,
        pair: RatePair,
        layered: &LayeredDistribution,
        ch: &BroadcastChannel,
    ) -> Result<RateSplit> {
        let prof = profile(layered, ch);
        if (pair.r0 > 0.0 || pair.r1 > 0.0) && !in_capacity_region(pair, &prof, DEFAULT_SLACK) {
            return Err(Error::NotAchievable(capacity_violations(pair, &prof, DEFAULT_SLACK).join("; ")));
        }
        if pair.r1 == 0.0 {
            return Ok(RateSplit { r11: 0.0, r12: 0.0 });
        }
        match *self {
            SplitPolicy::Constructive => constructive_split(pair, &prof, DEFAULT_SLACK),
            SplitPolicy::Balanced => balanced_split(pair, &prof),
            SplitPolicy::Explicit { r11, r12 } => {
                if (r11 + r12 - pair.r1).abs() > 1e-12 || r11 < 0.0 || r12 < 0.0 {
                    return Err(Error::Config(format!(
                        "split ({r11}, {r12}) does not add up to r1 = {}",
                        pair.r1
                    )));
                }
                Ok(RateSplit { r11, r12 })
            }
        }
    }
}

/// Named seeds; every random draw in a campaign comes from one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub stats: u64,
    pub frozen: u64,
    pub common_randomness: u64,
    pub trials: u64,
}

impl Seeds {
    /// Four distinct seeds derived from one.
    pub fn from_master(seed: u64) -> Self {
        Self {
            stats: seed,
            frozen: seed.wrapping_add(1),
            common_randomness: seed.wrapping_add(2),
            trials: seed.wrapping_add(3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub layered: LayeredDistribution,
    /// The channel the code is designed and decoded for.
    pub channel: BroadcastChannel,
    /// The channel blocks actually cross; defaults to `channel`.
    pub physical: Option<BroadcastChannel>,
    pub rates: RateSpec,
    pub split: SplitPolicy,
    pub k: usize,
    pub ns: Vec<u32>,
    pub trials: u64,
    pub selection: SelectionSpec,
    pub stats_samples: u64,
    pub backoff: bool,
    pub seeds: Seeds,
    /// Record wall-clock time per point. Off by default so that records are
    /// reproducible byte for byte.
    pub wall_clock: bool,
}

impl ExperimentConfig {
    pub fn physical_channel(&self) -> &BroadcastChannel {
        self.physical.as_ref().unwrap_or(&self.channel)
    }

    /// Rates and split resolved against the design channel.
    pub fn resolved_rates(&self) -> Result<(RatePair, RateSplit)> {
        let pair = self.rates.resolve(&self.layered, &self.channel)?;
        let split = self.split.resolve(pair, &self.layered, &self.channel)?;
        Ok((pair, split))
    }

    pub fn construction_params(&self, n: u32) -> Result<ConstructionParams> {
        let (rates, split) = self.resolved_rates()?;
        Ok(ConstructionParams {
            layered: self.layered.clone(),
            channel: self.channel.clone(),
            n,
            k: self.k,
            selection: self.selection.clone(),
            stats_samples: self.stats_samples,
            stats_seed: self.seeds.stats,
            rates,
            split: Some(split),
            backoff: self.backoff,
            frozen_seed: self.seeds.frozen,
            common_randomness_seed: self.seeds.common_randomness,
        })
    }
}

/// Wilson score interval for `errors` out of `trials` at normal quantile `z`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Outcome of checking that a sequence of estimates does not increase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendVerdict {
    /// Consecutive pairs where the later estimate is larger.
    pub inversions: usize,
    /// Inversions larger than two combined standard errors.
    pub significant_inversions: usize,
    pub holds: bool,
}

/// Non-increasing up to at most one inversion, and that one within two
/// combined standard errors. `points` holds `(estimate, standard error)`.
pub fn non_increasing_trend(points: &[(f64, f64)]) -> TrendVerdict {
    let mut inversions = 0;
    let mut significant = 0;
    for w in points.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        if b > a {
            inversions += 1;
            if b - a > 2.0 * (sa * sa + sb * sb).sqrt() {
                significant += 1;
            }
        }
    }
    TrendVerdict {
        inversions,
        significant_inversions: significant,
        holds: inversions <= 1 && significant == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::stream;
    use rand::Rng;

    #[test]
    fn wilson_covers_known_rate() {
        let p = 0.07;
        let trials = 400;
        let reps = 2000;
        let mut covered = 0;
        let mut rng = stream(11, 0);
        for _ in 0..reps {
            let e = (0..trials).filter(|_| rng.gen::<f64>() < p).count() as u64;
            let (lo, hi) = wilson_interval(e, trials, 1.96);
            if lo <= p && p <= hi {
                covered += 1;
            }
        }
        assert!(covered as f64 / reps as f64 >= 0.93, "coverage {covered}/{reps}");
    }

    #[test]
    fn wilson_extremes_stay_in_unit_interval() {
        let (lo, hi) = wilson_interval(0, 10, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.5);
        let (lo, hi) = wilson_interval(10, 10, 1.96);
        assert!(lo > 0.5 && hi == 1.0);
    }

    #[test]
    fn trend_rules() {
        assert!(non_increasing_trend(&[(0.3, 0.01), (0.2, 0.01), (0.1, 0.01)]).holds);
        assert!(non_increasing_trend(&[(0.3, 0.01), (0.31, 0.01), (0.1, 0.01)]).holds);
        assert!(!non_increasing_trend(&[(0.3, 0.01), (0.4, 0.01), (0.1, 0.01)]).holds);
        assert!(!non_increasing_trend(&[(0.3, 0.01), (0.31, 0.01), (0.32, 0.01)]).holds);
    }
}
