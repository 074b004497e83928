//! Seeds, config documents, bit files and versioned documents.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::channel::{make_product_channel, BroadcastChannel};
use crate::codec::SelectionSpec;
use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, RateSpec, Seeds, SplitPolicy, TvConfig, VerifyConfig};
use crate::prob::{ConditionalPmf, LayeredDistribution};

/// The reference generator: ChaCha8 keyed by `seed`, on stream `id`.
///
/// Every random quantity in the crate is drawn from a stream obtained here,
/// so runs are reproducible from the seeds named in a config.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Version accepted in config documents and written into reports.
pub const CONFIG_VERSION: u32 = 1;

/// A kernel given by name (`"bsc 0.1"`, `"bec 0.2"`, `"identity"`) or as a
/// row-stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

impl KernelSpec {
    /// The kernel, with `inputs` rows when given by name.
    pub fn build(&self, inputs: usize) -> Result<ConditionalPmf> {
        match self {
            KernelSpec::Matrix(rows) => ConditionalPmf::new(rows.clone()),
            KernelSpec::Named(s) => {
                let parts: Vec<&str> = s.split_whitespace().collect();
                let param = |p: &[&str]| -> Result<f64> {
                    match p {
                        [_, v] => v.parse().map_err(|_| Error::Config(format!("bad parameter in kernel '{s}'"))),
                        _ => Err(Error::Config(format!("kernel '{s}' takes one parameter"))),
                    }
                };
                let binary = || {
                    if inputs == 2 {
                        Ok(())
                    } else {
                        Err(Error::Config(format!("kernel '{s}' needs a binary input, got {inputs} symbols")))
                    }
                };
                match parts.first().copied() {
                    Some("bsc") => {
                        binary()?;
                        ConditionalPmf::bsc(param(&parts)?)
                    }
                    Some("bec") => {
                        binary()?;
                        ConditionalPmf::bec(param(&parts)?)
                    }
                    Some("identity") if parts.len() == 1 => Ok(ConditionalPmf::identity(inputs)),
                    _ => Err(Error::Config(format!("unknown kernel '{s}'"))),
                }
            }
        }
    }
}

/// Receiver 1 and 3 kernels from `x`, and the degrading kernel from `y1` to `y2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub receiver1: KernelSpec,
    pub receiver3: KernelSpec,
    pub degrade2: KernelSpec,
}

impl ChannelSection {
    pub fn build(&self) -> Result<BroadcastChannel> {
        let c1 = self.receiver1.build(2)?;
        let c3 = self.receiver3.build(2)?;
        let c2 = self.degrade2.build(c1.output_size())?;
        make_product_channel(&c1, &c3, &c2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSection {
    pub pw1: f64,
    pub pv1_given_w: [f64; 2],
    pub px1_given_v: [f64; 2],
}

impl DistributionSection {
    pub fn build(&self) -> Result<LayeredDistribution> {
        LayeredDistribution::from_params(self.pw1, self.pv1_given_w, self.px1_given_v)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    /// Fraction of the largest-public corner; excludes `r0` and `r1`.
    pub corner_fraction: Option<f64>,
    /// `constructive`, `balanced` or `explicit` (with `r11` and `r12`).
    pub split: Option<String>,
    pub r11: Option<f64>,
    pub r12: Option<f64>,
}

impl RatesSection {
    pub fn rate_spec(&self) -> Result<RateSpec> {
        match (self.r0, self.r1, self.corner_fraction) {
            (None, None, Some(f)) => Ok(RateSpec::CornerFraction { corner_fraction: f }),
            (r0, r1, None) => Ok(RateSpec::Explicit {
                r0: r0.unwrap_or(0.0),
                r1: r1.unwrap_or(0.0),
            }),
            _ => Err(Error::Config("give either r0/r1 or corner_fraction, not both".into())),
        }
    }

    pub fn split_policy(&self) -> Result<SplitPolicy> {
        match (self.split.as_deref(), self.r11, self.r12) {
            (None | Some("constructive"), None, None) => Ok(SplitPolicy::Constructive),
            (Some("balanced"), None, None) => Ok(SplitPolicy::Balanced),
            (None | Some("explicit"), Some(r11), Some(r12)) => Ok(SplitPolicy::Explicit { r11, r12 }),
            (Some(s), _, _) => Err(Error::Config(format!("split '{s}' does not match the given fields"))),
            _ => Err(Error::Config("an explicit split needs both r11 and r12".into())),
        }
    }
}

fn default_k() -> usize {
    2
}
fn default_stats_samples() -> u64 {
    10_000
}
fn default_selection() -> SelectionSpec {
    SelectionSpec::Threshold {
        beta: crate::polar::sets::DEFAULT_BETA,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    /// Block length exponent used by `construct`; defaults to the first
    /// entry of `experiment.n_list`.
    pub n: Option<u32>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_selection")]
    pub selection: SelectionSpec,
    #[serde(default = "default_stats_samples")]
    pub stats_samples: u64,
    #[serde(default)]
    pub backoff: bool,
}

impl Default for CodeSection {
    fn default() -> Self {
        Self {
            n: None,
            k: default_k(),
            selection: default_selection(),
            stats_samples: default_stats_samples(),
            backoff: false,
        }
    }
}

fn default_trials() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub n_list: Vec<u32>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub wall_clock: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            n_list: Vec::new(),
            trials: default_trials(),
            wall_clock: false,
        }
    }
}

/// Either one master seed or all four named seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedsSection {
    pub master: Option<u64>,
    pub stats: Option<u64>,
    pub frozen: Option<u64>,
    pub common_randomness: Option<u64>,
    pub trials: Option<u64>,
}

impl SeedsSection {
    /// Named seeds override the ones derived from `master`.
    pub fn resolve(&self) -> Result<Seeds> {
        let base = self.master.map(Seeds::from_master);
        let pick = |v: Option<u64>, d: Option<u64>, name: &str| {
            v.or(d).ok_or_else(|| Error::Config(format!("seed '{name}' missing and no master seed given")))
        };
        Ok(Seeds {
            stats: pick(self.stats, base.map(|b| b.stats), "stats")?,
            frozen: pick(self.frozen, base.map(|b| b.frozen), "frozen")?,
            common_randomness: pick(self.common_randomness, base.map(|b| b.common_randomness), "common_randomness")?,
            trials: pick(self.trials, base.map(|b| b.trials), "trials")?,
        })
    }
}

fn default_tv_samples() -> u64 {
    100_000
}
fn default_batches() -> u64 {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvSection {
    pub n_list: Vec<u32>,
    #[serde(default = "default_tv_samples")]
    pub samples: u64,
    #[serde(default = "default_batches")]
    pub batches: u64,
}

fn default_resolution() -> usize {
    11
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

/// Overrides of the verification suite sizes; the seed comes from `seeds`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub identity_triples: Option<usize>,
    pub fm_profiles: Option<usize>,
    pub fm_points_per_profile: Option<usize>,
    pub split_draws: Option<usize>,
    pub split_grid_step: Option<f64>,
    pub oracle_samples: Option<u64>,
    pub oracle_random_setups: Option<usize>,
}

/// The TOML config read by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub version: u32,
    pub channel: ChannelSection,
    /// Channel the blocks actually cross, when it differs from the design channel.
    pub physical: Option<ChannelSection>,
    pub distribution: DistributionSection,
    #[serde(default)]
    pub rates: RatesSection,
    #[serde(default)]
    pub code: CodeSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    pub seeds: SeedsSection,
    pub tv: Option<TvSection>,
    pub region: Option<RegionSection>,
    #[serde(default)]
    pub verify: VerifySection,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: ConfigDocument = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if doc.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                doc.version
            )));
        }
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Replaces every seed with those derived from `master`.
    pub fn override_seed(&mut self, master: u64) {
        self.seeds = SeedsSection {
            master: Some(master),
            stats: None,
            frozen: None,
            common_randomness: None,
            trials: None,
        };
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        if self.experiment.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.code.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let ns = if self.experiment.n_list.is_empty() {
            self.code.n.into_iter().collect()
        } else {
            self.experiment.n_list.clone()
        };
        Ok(ExperimentConfig {
            layered: self.distribution.build()?,
            channel: self.channel.build()?,
            physical: self.physical.as_ref().map(ChannelSection::build).transpose()?,
            rates: self.rates.rate_spec()?,
            split: self.rates.split_policy()?,
            k: self.code.k,
            ns,
            trials: self.experiment.trials,
            selection: self.code.selection.clone(),
            stats_samples: self.code.stats_samples,
            backoff: self.code.backoff,
            seeds: self.seeds.resolve()?,
            wall_clock: self.experiment.wall_clock,
        })
    }

    /// Exponent used by `construct`.
    pub fn construct_n(&self) -> Result<u32> {
        self.code
            .n
            .or_else(|| self.experiment.n_list.first().copied())
            .ok_or_else(|| Error::Config("set code.n or experiment.n_list".into()))
    }

    pub fn tv_config(&self) -> Result<TvConfig> {
        let tv = self
            .tv
            .as_ref()
            .ok_or_else(|| Error::Config("missing [tv] section".into()))?;
        Ok(TvConfig {
            layered: self.distribution.build()?,
            channel: self.channel.build()?,
            ns: tv.n_list.clone(),
            samples: tv.samples,
            batches: tv.batches,
            selection: self.code.selection.clone(),
            stats_samples: self.code.stats_samples,
            seeds: self.seeds.resolve()?,
        })
    }

    pub fn region_resolution(&self) -> usize {
        self.region.map_or(default_resolution(), |r| r.resolution)
    }

    pub fn verify_config(&self) -> Result<VerifyConfig> {
        let v = self.verify;
        let d = VerifyConfig::with_seed(self.seeds.resolve()?.stats);
        Ok(VerifyConfig {
            identity_triples: v.identity_triples.unwrap_or(d.identity_triples),
            fm_profiles: v.fm_profiles.unwrap_or(d.fm_profiles),
            fm_points_per_profile: v.fm_points_per_profile.unwrap_or(d.fm_points_per_profile),
            split_draws: v.split_draws.unwrap_or(d.split_draws),
            split_grid_step: v.split_grid_step.unwrap_or(d.split_grid_step),
            oracle_samples: v.oracle_samples.unwrap_or(d.oracle_samples),
            oracle_random_setups: v.oracle_random_setups.unwrap_or(d.oracle_random_setups),
            ..d
        })
    }
}

/// Packs bits little-endian within each byte behind an 8-byte
/// little-endian bit count.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + bits.len().div_ceil(8));
    out.extend_from_slice(&(bits.len() as u64).to_le_bytes());
    for chunk in bits.chunks(8) {
        out.push(chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << i)));
    }
    out
}

pub fn unpack_bits(bytes: &[u8]) -> Result<Vec<u8>> {
    let header: [u8; 8] = bytes
        .get(..8)
        .and_then(|h| h.try_into().ok())
        .ok_or_else(|| Error::Format("bit file shorter than its length header".into()))?;
    let len = u64::from_le_bytes(header);
    let body = &bytes[8..];
    let need = len.div_ceil(8);
    if body.len() as u64 != need {
        return Err(Error::Format(format!(
            "bit file declares {len} bits ({need} bytes) but holds {} bytes",
            body.len()
        )));
    }
    Ok((0..len as usize).map(|i| (body[i / 8] >> (i % 8)) & 1).collect())
}

pub fn write_bits(path: &Path, bits: &[u8]) -> Result<()> {
    Ok(std::fs::write(path, pack_bits(bits))?)
}

pub fn read_bits(path: &Path) -> Result<Vec<u8>> {
    unpack_bits(&std::fs::read(path)?)
}

/// A report with its format version and kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Versioned<T> {
    pub version: u32,
    pub kind: String,
    pub data: T,
}

pub fn to_versioned_json<T: Serialize>(kind: &str, data: &T) -> Result<String> {
    let doc = Versioned {
        version: CONFIG_VERSION,
        kind: kind.to_string(),
        data,
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

pub fn from_versioned_json<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T> {
    let doc: Versioned<T> = serde_json::from_str(text)?;
    if doc.version != CONFIG_VERSION || doc.kind != kind {
        return Err(Error::Format(format!(
            "expected {kind} version {CONFIG_VERSION}, found {} version {}",
            doc.kind, doc.version
        )));
    }
    Ok(doc.data)
}

/// Channel outputs for one receiver over all `k` blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observations {
    pub receiver: u8,
    pub blocks: Vec<Vec<usize>>,
}
