//! Per-receiver block error rates over the chained code.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{construct, encode_chain, Budget, CaseTag, CodeInstance, Decoder};
use crate::error::Result;
use crate::io::stream;
use crate::region::{RatePair, RateSplit};

use super::{wilson_interval, ExperimentConfig};

/// Errors at one receiver, or of the union event when `receiver` is `joint`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverTally {
    pub receiver: String,
    pub trials: u64,
    pub errors: u64,
    pub rate: f64,
    /// Wilson 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ReceiverTally {
    fn new(receiver: &str, errors: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, trials, 1.96);
        Self {
            receiver: receiver.to_string(),
            trials,
            errors,
            rate: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
            ci_low,
            ci_high,
        }
    }

    /// Binomial standard error of `rate`.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (self.rate * (1.0 - self.rate) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub n: u32,
    pub k: usize,
    pub trials: u64,
    pub case_tag: CaseTag,
    pub budget: Budget,
    pub realized: RatePair,
    pub backoff_factor: f64,
    /// Receivers 1, 2 and 3, in that order.
    pub receivers: Vec<ReceiverTally>,
    pub joint: ReceiverTally,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateReport {
    pub requested: RatePair,
    pub split: RateSplit,
    pub points: Vec<PointRecord>,
}

impl ErrorRateReport {
    /// One row per point and receiver, joint last.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| crate::Error::Io(e.to_string());
        w.write_record(["n", "k", "case", "receiver", "trials", "errors", "rate", "ci_low", "ci_high"])
            .map_err(io)?;
        for p in &self.points {
            for t in p.receivers.iter().chain(std::iter::once(&p.joint)) {
                w.write_record([
                    p.n.to_string(),
                    p.k.to_string(),
                    p.case_tag.to_string(),
                    t.receiver.clone(),
                    t.trials.to_string(),
                    t.errors.to_string(),
                    format!("{:.6}", t.rate),
                    format!("{:.6}", t.ci_low),
                    format!("{:.6}", t.ci_high),
                ])
                .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Error flags of one trial: receivers 1, 2, 3.
pub fn run_trial(inst: &CodeInstance, decoder: &Decoder<'_>, physical: &crate::channel::BroadcastChannel, seed: u64, id: u64) -> [bool; 3] {
    let mut rng = stream(seed, id);
    let public: Vec<u8> = (0..inst.budget.public_total).map(|_| rng.gen::<bool>() as u8).collect();
    let private: Vec<u8> = (0..inst.budget.private_total).map(|_| rng.gen::<bool>() as u8).collect();
    let blocks = encode_chain(inst, &public, &private).expect("message lengths follow the budget");
    let samples: Vec<_> = blocks.iter().map(|b| physical.transmit(&b.x, &mut rng)).collect();
    let mut errs = [false; 3];
    for j in 1..=3u8 {
        let ys: Vec<&[usize]> = samples.iter().map(|s| s.for_receiver(j)).collect();
        let out = decoder.decode(j, &ys);
        errs[(j - 1) as usize] = out.public != public || out.private.is_some_and(|p| p != private);
    }
    errs
}

/// Constructs the code for every `n` and counts block errors over
/// `trials` independent chains. Trial `t` at exponent `n` draws from stream
/// `(n << 40) | t` of the trial seed, so counts do not depend on threading.
pub fn run_error_rate(cfg: &ExperimentConfig) -> Result<ErrorRateReport> {
    let (requested, split) = cfg.resolved_rates()?;
    let physical = cfg.physical_channel();
    let mut points = Vec::with_capacity(cfg.ns.len());
    for &n in &cfg.ns {
        let start = Instant::now();
        let inst = construct(&cfg.construction_params(n)?)?;
        let decoder = Decoder::new(&inst, &inst.channel);
        let counts = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let e = run_trial(&inst, &decoder, physical, cfg.seeds.trials, ((n as u64) << 40) | t);
                [e[0] as u64, e[1] as u64, e[2] as u64, (e[0] || e[1] || e[2]) as u64]
            })
            .reduce(|| [0; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
        let receivers = (0..3)
            .map(|j| ReceiverTally::new(&(j + 1).to_string(), counts[j], cfg.trials))
            .collect();
        points.push(PointRecord {
            n,
            k: inst.k,
            trials: cfg.trials,
            case_tag: inst.layout.case_tag,
            budget: inst.budget,
            realized: inst.realized_rates(),
            backoff_factor: inst.backoff_factor,
            receivers,
            joint: ReceiverTally::new("joint", counts[3], cfg.trials),
            wall_clock_s: cfg.wall_clock.then(|| start.elapsed().as_secs_f64()),
        });
    }
    Ok(ErrorRateReport {
        requested,
        split,
        points,
    })
}
