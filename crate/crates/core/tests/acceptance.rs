//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits nonzero when a criterion fails that is not listed in
//! `KNOWN_SHORTFALLS`.

mod common;

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use chainpolar::channel::noiseless_channel;
use chainpolar::codec::{sc_encode_layer, BitSampler, CaseTag, Decoder, LayerJob, Role};
use chainpolar::harness::error_rate::run_trial;
use chainpolar::harness::verify::{
    check_channel_extension, check_constructive_split, check_entropy_bounds, check_erasure_recursion,
    check_fm, check_oracle_agreement, exact_suite, oracle_suite, CheckResult,
};
use chainpolar::harness::{non_increasing_trend, run_error_rate, run_tv_trend, tv::exact_block_tv, tv::tv_sets};
use chainpolar::io::ConfigDocument;
use chainpolar::polar::{exact_single_layer, polar_transform, Layer, LayerTables, ScEngine};
use chainpolar::prob::LayeredDistribution;

/// Criteria expected to fail at desk scale; see the README.
const KNOWN_SHORTFALLS: &[u32] = &[9];

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn from_check(id: u32, name: &'static str, c: &CheckResult) -> Outcome {
    Outcome {
        id,
        name,
        passed: c.passed,
        detail: format!("{} cases, {} failures, worst {:.3e}; {}", c.cases, c.failures, c.worst, c.detail),
    }
}

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

/// Returns the preset bits in order and multiplies the probability of each
/// choice into `weight`.
struct ForcedSampler {
    bits: Vec<u8>,
    next: usize,
    weight: f64,
}

impl BitSampler for ForcedSampler {
    fn sample(&mut self, _block: usize, _layer: Layer, _index: usize, p1: f64) -> u8 {
        let b = self.bits[self.next];
        self.next += 1;
        self.weight *= if b == 1 { p1 } else { 1.0 - p1 };
        b
    }
}

/// `P(u)` for `u = x G` with `x` drawn position by position from `px[i]`.
fn brute_force_u_law(px: &[[f64; 2]]) -> Vec<f64> {
    let len = px.len();
    let mut law = vec![0.0; 1 << len];
    for xw in 0..1usize << len {
        let x: Vec<u8> = (0..len).map(|i| ((xw >> i) & 1) as u8).collect();
        let u = polar_transform(&x).unwrap();
        let p: f64 = x.iter().enumerate().map(|(i, &b)| px[i][b as usize]).product();
        law[u.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum::<usize>()] += p;
    }
    law
}

/// Encoder law from the product formula, using conditionals of `law`.
fn formula_law(law: &[f64], roles: &[Role]) -> Vec<f64> {
    let prefix_mass = |u: usize, upto: usize| -> f64 {
        let mask = (1usize << upto) - 1;
        law.iter().enumerate().filter(|(w, _)| w & mask == u & mask).map(|(_, p)| p).sum()
    };
    (0..law.len())
        .map(|u| {
            let mut q = 1.0;
            for (i, role) in roles.iter().enumerate() {
                let past = prefix_mass(u, i);
                let with_one = prefix_mass(u | (1 << i), i + 1);
                let p1 = if past > 0.0 { with_one / past } else { 0.5 };
                let b = (u >> i) & 1;
                q *= match role {
                    Role::High => 0.5,
                    Role::Low => ((p1 - (1.0 - p1) > 1e-9) as usize == b) as u8 as f64,
                    Role::Random => {
                        if b == 1 {
                            p1
                        } else {
                            1.0 - p1
                        }
                    }
                };
            }
            q
        })
        .collect()
}

/// Encoder law by running the SC encoder over every frozen assignment and
/// every sampled choice.
fn enumerated_law(layer: Layer, layered: &LayeredDistribution, context: Option<&[u8]>, roles: &[Role]) -> Vec<f64> {
    let len = roles.len();
    let n = len.trailing_zeros();
    let tables = LayerTables::source(layer, layered);
    let high: Vec<usize> = (0..len).filter(|&i| roles[i] == Role::High).collect();
    let random = roles.iter().filter(|&&r| r == Role::Random).count();
    let mut engine = ScEngine::new(n, 1);
    let mut law = vec![0.0; 1 << len];
    for h in 0..1usize << high.len() {
        let mut assign = vec![0u8; len];
        for (k, &i) in high.iter().enumerate() {
            assign[i] = ((h >> k) & 1) as u8;
        }
        for r in 0..1usize << random {
            let mut sampler = ForcedSampler {
                bits: (0..random).map(|k| ((r >> k) & 1) as u8).collect(),
                next: 0,
                weight: 1.0,
            };
            let job = LayerJob {
                block: 0,
                layer,
                tables: &tables,
                context,
                roles,
                assignments: &assign,
            };
            let (u, _) = sc_encode_layer(&mut engine, &job, &mut sampler, None);
            let idx: usize = u.iter().enumerate().map(|(i, &b)| (b as usize) << i).sum();
            law[idx] += sampler.weight / (1usize << high.len()) as f64;
        }
    }
    law
}

/// Two `H`, four `L` and two `R` positions by source `Z`.
fn roles_from_z(z: &[f64]) -> Vec<Role> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    let mut roles = vec![Role::Random; z.len()];
    for &i in &idx[..4] {
        roles[i] = Role::Low;
    }
    for &i in &idx[z.len() - 2..] {
        roles[i] = Role::High;
    }
    roles
}

fn criterion_7() -> Outcome {
    let layered = LayeredDistribution::from_params(0.3, [0.2, 0.75], [0.1, 0.8]).unwrap();
    let ch = noiseless_channel();
    let mut worst = 0.0f64;
    let mut mass_err = 0.0f64;
    // W alone, then V given a fixed w sequence
    let w_ctx: Vec<u8> = vec![0, 1, 1, 0, 1, 0, 0, 1];
    for layer in [Layer::W, Layer::V] {
        let stats = exact_single_layer(layer, &layered, &ch, 3).unwrap();
        let roles = roles_from_z(&stats.z_source);
        let px: Vec<[f64; 2]> = (0..8)
            .map(|i| match layer {
                Layer::W => [layered.pw.p(0), layered.pw.p(1)],
                _ => {
                    let c = w_ctx[i] as usize;
                    [layered.pv_given_w.p(c, 0), layered.pv_given_w.p(c, 1)]
                }
            })
            .collect();
        let ctx = (layer == Layer::V).then_some(w_ctx.as_slice());
        let law = brute_force_u_law(&px);
        let formula = formula_law(&law, &roles);
        let enumerated = enumerated_law(layer, &layered, ctx, &roles);
        for (a, b) in formula.iter().zip(&enumerated) {
            worst = worst.max((a - b).abs());
        }
        mass_err = mass_err.max((enumerated.iter().sum::<f64>() - 1.0).abs());
    }
    Outcome {
        id: 7,
        name: "encoder law equals the product formula (n=3)",
        passed: worst < 1e-10 && mass_err < 1e-10,
        detail: format!("max cell deviation {worst:.3e}, total mass error {mass_err:.3e}"),
    }
}

fn criterion_8() -> Outcome {
    let stats = common::synthetic_stats();
    let ch = noiseless_channel();
    let mut errors = 0;
    let mut detail = Vec::new();
    for tag in CaseTag::ALL {
        let inst = common::synthetic_instance(&stats, tag, 3);
        let dec = Decoder::new(&inst, &ch);
        let e = (0..100)
            .filter(|&t| run_trial(&inst, &dec, &ch, 808, t).iter().any(|&x| x))
            .count();
        errors += e;
        detail.push(format!(
            "{tag}: {e}/100 (public {}, private {})",
            inst.budget.public_total, inst.budget.private_total
        ));
    }
    Outcome {
        id: 8,
        name: "noiseless round trip in every case",
        passed: errors == 0,
        detail: detail.join(", "),
    }
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let doc = ConfigDocument::load(&repo_file("configs/default.toml")).unwrap();
    let cfg = doc.experiment().unwrap();
    assert_eq!(cfg.ns, vec![6, 8, 10]);
    assert_eq!(cfg.trials, 10_000);
    let report = run_error_rate(&cfg).unwrap();
    let mut passed = true;
    let mut detail = Vec::new();
    for j in 0..3 {
        let pts: Vec<(f64, f64)> = report
            .points
            .iter()
            .map(|p| (p.receivers[j].rate, p.receivers[j].std_error()))
            .collect();
        let v = non_increasing_trend(&pts);
        passed &= v.holds;
        let rates: Vec<String> = pts.iter().map(|p| format!("{:.4}", p.0)).collect();
        detail.push(format!(
            "rx{} [{}] {}",
            j + 1,
            rates.join(", "),
            if v.holds { "ok" } else { "rising" }
        ));
    }
    let union_ok = report.points.iter().all(|p| {
        p.joint.errors <= p.receivers.iter().map(|t| t.errors).sum::<u64>()
    });
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 9,
        name: "block error rate non-increasing in n",
        passed: passed && union_ok && secs < 1800.0,
        detail: format!("{}; {:.0} s", detail.join("; "), secs),
    }
}

fn criterion_10() -> Outcome {
    let doc = ConfigDocument::load(&repo_file("configs/default.toml")).unwrap();
    let mut cfg = doc.tv_config().unwrap();
    assert_eq!(cfg.ns, vec![4, 6, 8]);
    let report = run_tv_trend(&cfg).unwrap();
    let pts: Vec<(f64, f64)> = report.points.iter().map(|p| (p.tv, p.std_error)).collect();
    let trend = non_increasing_trend(&pts);
    cfg.ns = vec![2];
    let sets = tv_sets(&cfg, 2).unwrap();
    let exact = exact_block_tv(&cfg.layered, &sets).unwrap();
    let tvs: Vec<String> = pts.iter().map(|p| format!("{:.5}±{:.5}", p.0, p.1)).collect();
    Outcome {
        id: 10,
        name: "encoder output distance shrinks with n",
        passed: trend.holds && exact.within_bound(),
        detail: format!(
            "single-letter [{}]; exact n=2 block distance {:.5} vs half-bound {:.5}",
            tvs.join(", "),
            exact.tv,
            exact.bound / 2.0
        ),
    }
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_chainpolar"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    (status.status.code().unwrap_or(-1), std::fs::read(&out).unwrap_or_default())
}

fn criterion_11() -> Outcome {
    let default = repo_file("configs/default.toml");
    let regression = repo_file("configs/regression.toml");
    let verify = ["verify", "--config", default.to_str().unwrap()];
    let simulate = ["simulate", "--config", regression.to_str().unwrap()];
    let (c1, v1) = run_cli(&verify);
    let (c2, v2) = run_cli(&verify);
    let (c3, s1) = run_cli(&simulate);
    let (c4, s2) = run_cli(&simulate);
    let same = v1 == v2 && s1 == s2 && !v1.is_empty() && !s1.is_empty();
    Outcome {
        id: 11,
        name: "byte-identical verify and simulate reruns",
        passed: same && [c1, c2, c3, c4] == [0; 4],
        detail: format!(
            "exit codes {c1} {c2} {c3} {c4}; verify {} bytes, simulate {} bytes, identical {same}",
            v1.len(),
            s1.len()
        ),
    }
}

fn timed(f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    o.detail = format!("{} [{:.1} s]", o.detail, start.elapsed().as_secs_f64());
    o
}

fn main() {
    let seed = 20240601;
    let mut results = Vec::new();
    let mut report = |o: Outcome| {
        println!(
            "criterion {:>2} {}: {} ({})",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
        results.push(o);
    };

    // CHAINPOLAR_CRITERIA=1,7 runs a subset
    let wanted: Option<Vec<u32>> = std::env::var("CHAINPOLAR_CRITERIA")
        .ok()
        .map(|v| v.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let want = |id: u32| wanted.as_ref().is_none_or(|w| w.contains(&id));

    if want(1) || want(3) {
        let suite = oracle_suite(seed, 2).unwrap();
        let exact = exact_suite(&suite).unwrap();
        if want(1) {
            report(timed(|| {
                let start = Instant::now();
                let c = check_oracle_agreement(&suite, &exact, 100_000, seed).unwrap();
                let mut o = from_check(1, "exact and Monte Carlo statistics agree", &c);
                o.passed &= suite.len() >= 5 && start.elapsed().as_secs() < 300;
                o
            }));
        }
        if want(3) {
            report(timed(|| from_check(3, "entropy between Z squared and Z", &check_entropy_bounds(&exact).unwrap())));
        }
    }
    if want(2) {
        report(timed(|| from_check(2, "erasure recursion", &check_erasure_recursion().unwrap())));
    }
    if want(4) {
        report(timed(|| {
            from_check(4, "distance unchanged by a shared channel", &check_channel_extension(seed, 100).unwrap())
        }));
    }
    if want(5) {
        report(timed(|| from_check(5, "constructive rate split", &check_constructive_split(seed, 1000, 1e-3))));
    }
    if want(6) {
        report(timed(|| from_check(6, "projection equivalence", &check_fm(seed, 20, 500))));
    }
    let rest: [(u32, fn() -> Outcome); 5] =
        [(7, criterion_7), (8, criterion_8), (9, criterion_9), (10, criterion_10), (11, criterion_11)];
    for (id, f) in rest {
        if want(id) {
            report(timed(f));
        }
    }
    results.sort_by_key(|o| o.id);

    let unexpected: Vec<u32> = results
        .iter()
        .filter(|o| !o.passed && !KNOWN_SHORTFALLS.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let passed = results.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if !unexpected.is_empty() {
        eprintln!("failing criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
