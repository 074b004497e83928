//! Property checks run by `verify`: identities, bounds and oracle agreement.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channel::{bsc_channel, make_product_channel, BroadcastChannel};
use crate::error::Result;
use crate::io::stream;
use crate::polar::{exact_layer_stats, monte_carlo_layer_stats, Layer, LayerStats, MAX_EXACT_N};
use crate::prob::{tv_channel_extension_identity, ConditionalPmf, LayeredDistribution, Pmf};
use crate::region::{
    fm_equivalence_check, in_capacity_region, constructive_split, profile, split_conditions_hold,
    MutualInfoProfile, RatePair, RateSplit,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    #[serde(default = "d_triples")]
    pub identity_triples: usize,
    #[serde(default = "d_profiles")]
    pub fm_profiles: usize,
    #[serde(default = "d_fm_points")]
    pub fm_points_per_profile: usize,
    #[serde(default = "d_split_draws")]
    pub split_draws: usize,
    /// Grid step of the brute-force split search.
    #[serde(default = "d_grid")]
    pub split_grid_step: f64,
    #[serde(default = "d_oracle_samples")]
    pub oracle_samples: u64,
    /// Randomly drawn setups added to the fixed oracle suite.
    #[serde(default = "d_random_setups")]
    pub oracle_random_setups: usize,
}

fn d_triples() -> usize {
    100
}
fn d_profiles() -> usize {
    20
}
fn d_fm_points() -> usize {
    500
}
fn d_split_draws() -> usize {
    1000
}
fn d_grid() -> f64 {
    1e-3
}
fn d_oracle_samples() -> u64 {
    100_000
}
fn d_random_setups() -> usize {
    2
}

impl VerifyConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            identity_triples: d_triples(),
            fm_profiles: d_profiles(),
            fm_points_per_profile: d_fm_points(),
            split_draws: d_split_draws(),
            split_grid_step: d_grid(),
            oracle_samples: d_oracle_samples(),
            oracle_random_setups: d_random_setups(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    /// Largest deviation seen, in the check's own unit.
    pub worst: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn random_pmf<R: Rng>(rng: &mut R, size: usize) -> Pmf {
    let raw: Vec<f64> = (0..size).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    Pmf::new(raw.into_iter().map(|v| v / s).collect()).expect("normalized")
}

fn random_kernel<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> ConditionalPmf {
    ConditionalPmf::new((0..inputs).map(|_| random_pmf(rng, outputs).mass().to_vec()).collect())
        .expect("rows are normalized")
}

/// A random layered distribution and a random degraded broadcast channel.
pub fn random_setup<R: Rng>(rng: &mut R) -> (LayeredDistribution, BroadcastChannel) {
    let layered = LayeredDistribution::from_params(
        rng.gen(),
        [rng.gen(), rng.gen()],
        [rng.gen(), rng.gen()],
    )
    .expect("parameters are probabilities");
    let n1 = rng.gen_range(2..=3);
    let n3 = rng.gen_range(2..=3);
    let n2 = rng.gen_range(2..=3);
    let ch = make_product_channel(
        &random_kernel(rng, 2, n1),
        &random_kernel(rng, 2, n3),
        &random_kernel(rng, n1, n2),
    )
    .expect("random kernels are valid");
    (layered, ch)
}

fn check(name: &str, cases: usize, failures: usize, worst: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: failures == 0 && cases > 0,
        cases,
        failures,
        worst,
        detail,
    }
}

/// `||P_X W - Q_X W|| = ||P_X - Q_X||` on random triples.
pub fn check_channel_extension(seed: u64, triples: usize) -> Result<CheckResult> {
    let mut rng = stream(seed, 1);
    let (mut worst, mut fails) = (0.0f64, 0);
    for _ in 0..triples {
        let nx = rng.gen_range(2..=5);
        let ny = rng.gen_range(2..=5);
        let px = random_pmf(&mut rng, nx);
        let qx = random_pmf(&mut rng, nx);
        let w = random_kernel(&mut rng, nx, ny);
        let (lhs, rhs) = tv_channel_extension_identity(&px, &qx, &w)?;
        let d = (lhs - rhs).abs();
        worst = worst.max(d);
        fails += (d > 1e-12) as usize;
    }
    Ok(check("channel-extension-identity", triples, fails, worst, "tolerance 1e-12".into()))
}

/// The fixed setups of the oracle suite.
pub fn oracle_suite(seed: u64, random: usize) -> Result<Vec<(LayeredDistribution, BroadcastChannel)>> {
    let mut out = vec![
        (
            LayeredDistribution::from_params(0.5, [0.2, 0.8], [0.15, 0.85])?,
            bsc_channel(0.05, 0.15, 0.05)?,
        ),
        (
            LayeredDistribution::from_params(0.3, [0.1, 0.6], [0.3, 0.9])?,
            bsc_channel(0.1, 0.25, 0.1)?,
        ),
        (
            LayeredDistribution::from_params(0.5, [0.0, 1.0], [0.0, 1.0])?,
            make_product_channel(
                &ConditionalPmf::bec(0.3)?,
                &ConditionalPmf::bec(0.5)?,
                &ConditionalPmf::identity(3),
            )?,
        ),
        (
            LayeredDistribution::from_params(0.4, [0.25, 0.7], [0.1, 0.95])?,
            make_product_channel(
                &ConditionalPmf::bsc(0.08)?,
                &ConditionalPmf::bec(0.4)?,
                &ConditionalPmf::bsc(0.2)?,
            )?,
        ),
    ];
    let mut rng = stream(seed, 2);
    for _ in 0..random {
        out.push(random_setup(&mut rng));
    }
    Ok(out)
}

/// Exact statistics of every setup for `n = 1..=3`, indexed by setup then `n - 1`.
pub fn exact_suite(suite: &[(LayeredDistribution, BroadcastChannel)]) -> Result<Vec<Vec<LayerStats>>> {
    suite
        .iter()
        .map(|(layered, ch)| (1..=MAX_EXACT_N).map(|n| exact_layer_stats(layered, ch, n)).collect())
        .collect()
}

/// `Z^2 <= H <= Z` on every exactly computed bit-channel.
pub fn check_entropy_bounds(exact: &[Vec<LayerStats>]) -> Result<CheckResult> {
    let (mut cases, mut fails, mut worst) = (0, 0, 0.0f64);
    for per_n in exact {
        for stats in per_n {
            for s in stats {
                let mut pairs: Vec<(&[f64], &[f64])> = vec![(&s.z_source, &s.h_source)];
                for (j, z) in &s.z_receiver {
                    pairs.push((z, &s.h_receiver[j]));
                }
                for (z, h) in pairs {
                    for (&z, &h) in z.iter().zip(h) {
                        cases += 1;
                        let excess = (z * z - h).max(h - z);
                        worst = worst.max(excess);
                        fails += (excess > 1e-9) as usize;
                    }
                }
            }
        }
    }
    Ok(check("entropy-between-z-squared-and-z", cases, fails, worst, "tolerance 1e-9".into()))
}

/// Per-index threshold, in standard errors, that keeps the chance of any
/// false alarm among `cases` two-sided comparisons at `family_rate`.
pub fn familywise_threshold(cases: usize, family_rate: f64) -> f64 {
    let tail = family_rate / (2.0 * cases.max(1) as f64);
    Normal::standard().inverse_cdf(1.0 - tail).max(3.0)
}

/// Monte Carlo `Z` against the exact value, in standard errors. Counts the
/// indices beyond three standard errors; the check fails when any index
/// exceeds the familywise threshold at rate 1%.
pub fn check_oracle_agreement(
    suite: &[(LayeredDistribution, BroadcastChannel)],
    exact_stats: &[Vec<LayerStats>],
    samples: u64,
    seed: u64,
) -> Result<CheckResult> {
    let mut deviations: Vec<(f64, String)> = Vec::new();
    for (c, (layered, ch)) in suite.iter().enumerate() {
        for n in 1..=MAX_EXACT_N {
            let exact = &exact_stats[c][(n - 1) as usize];
            let mc = monte_carlo_layer_stats(layered, ch, n, samples, seed.wrapping_add(c as u64));
            for (e, m) in exact.iter().zip(&mc) {
                let mut rows: Vec<(&[f64], &[f64], &[f64], String)> =
                    vec![(&e.z_source, &m.z_source, &m.se_source, "source".into())];
                for (j, z) in &e.z_receiver {
                    rows.push((z, &m.z_receiver[j], &m.se_receiver[j], format!("receiver {j}")));
                }
                for (ze, zm, se, what) in rows {
                    for i in 0..ze.len() {
                        let d = (ze[i] - zm[i]).abs();
                        // Per-sample values lie in [0, 1], so z (1 - z) / samples bounds
                        // the variance of the mean; near z = 0 or 1 the sample variance
                        // misses rare draws and runs far below it.
                        let bound = (ze[i] * (1.0 - ze[i]) / samples as f64).sqrt();
                        let se_i = se[i].max(bound);
                        let sigmas = if se_i > 0.0 {
                            d / se_i
                        } else if d > 1e-9 {
                            f64::INFINITY
                        } else {
                            0.0
                        };
                        let at = format!(
                            "setup {c}, n={n}, layer {}, {what}, index {i}: exact {} vs {} (se {}, sample se {})",
                            e.layer.name(),
                            ze[i],
                            zm[i],
                            se_i,
                            se[i]
                        );
                        deviations.push((sigmas, at));
                    }
                }
            }
        }
    }
    let cases = deviations.len();
    let limit = familywise_threshold(cases, 0.01);
    let beyond_three = deviations.iter().filter(|d| d.0 > 3.0).count();
    let fails = deviations.iter().filter(|d| d.0 > limit).count();
    let (worst, at) = deviations
        .iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .cloned()
        .unwrap_or((0.0, String::new()));
    let detail = format!(
        "{samples} samples; {beyond_three} of {cases} indices beyond 3 se; limit {limit:.3} se; worst at {at}"
    );
    Ok(check("exact-vs-monte-carlo", cases, fails, worst, detail))
}

/// Exact receiver `Z` of a uniform W layer seen through an erasure channel
/// against the erasure recursion.
pub fn check_erasure_recursion() -> Result<CheckResult> {
    let (mut cases, mut fails, mut worst) = (0, 0, 0.0f64);
    for eps in [0.1, 0.5] {
        let layered = LayeredDistribution::from_params(0.5, [0.0, 1.0], [0.0, 1.0])?;
        let ch = make_product_channel(
            &ConditionalPmf::bec(eps)?,
            &ConditionalPmf::bec(eps)?,
            &ConditionalPmf::identity(3),
        )?;
        for n in [1, 2] {
            let stats = exact_layer_stats(&layered, &ch, n)?;
            let w = &stats[Layer::W.index()];
            let expected = erasure_z(eps, n);
            for j in [1u8, 2, 3] {
                for (a, b) in w.z_receiver[&j].iter().zip(&expected) {
                    cases += 1;
                    let d = (a - b).abs();
                    worst = worst.max(d);
                    fails += (d > 1e-9) as usize;
                }
            }
        }
    }
    Ok(check("erasure-recursion", cases, fails, worst, "tolerance 1e-9".into()))
}

/// Erasure probabilities of the `2^n` bit-channels in natural order: the
/// index bits, most significant first, pick the worse (`0`) or better (`1`)
/// combination at each step.
pub fn erasure_z(eps: f64, n: u32) -> Vec<f64> {
    (0..1usize << n)
        .map(|i| {
            let mut z = eps;
            for b in (0..n).rev() {
                z = if (i >> b) & 1 == 1 { z * z } else { 2.0 * z - z * z };
            }
            z
        })
        .collect()
}

/// `I(V;Y1|W) + I(X;Y1|V) = I(X;Y1|W)` on random setups.
pub fn check_chain_rule(seed: u64, draws: usize) -> CheckResult {
    let mut rng = stream(seed, 3);
    let (mut fails, mut worst) = (0, 0.0f64);
    for _ in 0..draws {
        let (layered, ch) = random_setup(&mut rng);
        let p = profile(&layered, &ch);
        let d = (p.i_v_y1_given_w + p.i_x_y1_given_v - p.i_x_y1_given_w).abs();
        worst = worst.max(d);
        fails += (d > 1e-9) as usize;
    }
    check("superposition-chain-rule", draws, fails, worst, "tolerance 1e-9".into())
}

pub fn check_fm(seed: u64, profiles: usize, points: usize) -> CheckResult {
    let mut rng = stream(seed, 4);
    let (mut cases, mut fails) = (0, 0);
    let mut detail = String::new();
    for p in 0..profiles {
        let (layered, ch) = random_setup(&mut rng);
        let rep = fm_equivalence_check(&profile(&layered, &ch), points, seed.wrapping_add(p as u64), 1e-9);
        cases += rep.inside_pairs + rep.inside_triples;
        fails += rep.counterexamples();
        if let (true, Some(c)) = (detail.is_empty(), rep.counterexample) {
            detail = c;
        }
    }
    if detail.is_empty() {
        detail = format!("{profiles} profiles, {points} draws each");
    }
    check("projection-equivalence", cases, fails, fails as f64, detail)
}

/// Whether some `r11` on the grid (plus `r1` itself) meets the split conditions.
pub fn grid_split_exists(pair: RatePair, prof: &MutualInfoProfile, step: f64) -> bool {
    let steps = (pair.r1 / step).floor() as usize;
    (0..=steps)
        .map(|i| i as f64 * step)
        .chain(std::iter::once(pair.r1))
        .any(|r11| split_conditions_hold(pair.r0, RateSplit { r11, r12: pair.r1 - r11 }, prof))
}

/// Constructive split on random interior pairs, compared with a grid search.
pub fn check_constructive_split(seed: u64, draws: usize, step: f64) -> CheckResult {
    let mut rng = stream(seed, 5);
    let (mut done, mut fails) = (0, 0);
    let mut detail = String::new();
    // interior by a margin of two grid steps so the grid can see the interval
    let margin = 2.0 * step;
    while done < draws {
        let (layered, ch) = random_setup(&mut rng);
        let prof = profile(&layered, &ch);
        let r0_max = prof.i_w_y2.min(prof.i_v_y3);
        let pair = RatePair {
            r0: rng.gen::<f64>() * r0_max,
            r1: rng.gen::<f64>() * prof.i_x_y1_given_w,
        };
        if !in_capacity_region(pair, &prof, margin) {
            continue;
        }
        done += 1;
        let split = constructive_split(pair, &prof, 0.0);
        let constructive = split.as_ref().is_ok_and(|s| {
            split_conditions_hold(pair.r0, *s, &prof) && (s.r11 + s.r12 - pair.r1).abs() < 1e-12
        });
        let grid = grid_split_exists(pair, &prof, step);
        if !constructive || !grid {
            fails += 1;
            if detail.is_empty() {
                detail = format!("pair ({}, {}): constructive {constructive}, grid {grid}", pair.r0, pair.r1);
            }
        }
    }
    if detail.is_empty() {
        detail = format!("grid step {step}, interior margin {margin}");
    }
    check("constructive-split", draws, fails, fails as f64, detail)
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let suite = oracle_suite(cfg.seed, cfg.oracle_random_setups)?;
    let exact = exact_suite(&suite)?;
    let checks = vec![
        check_channel_extension(cfg.seed, cfg.identity_triples)?,
        check_entropy_bounds(&exact)?,
        check_erasure_recursion()?,
        check_chain_rule(cfg.seed, cfg.identity_triples),
        check_fm(cfg.seed, cfg.fm_profiles, cfg.fm_points_per_profile),
        check_constructive_split(cfg.seed, cfg.split_draws, cfg.split_grid_step),
        check_oracle_agreement(&suite, &exact, cfg.oracle_samples, cfg.seed)?,
    ];
    Ok(VerifyReport { seed: cfg.seed, checks })
}
