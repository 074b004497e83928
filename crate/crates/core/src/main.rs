use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chainpolar::codec::{construct, encode_chain, CodeInstance, Decoder};
use chainpolar::harness::{region_sweep::region_csv, run_error_rate, run_tv_trend, run_verify, sweep_region};
use chainpolar::io::{read_bits, stream, to_versioned_json, write_bits, ConfigDocument, Observations};
use chainpolar::polar::polarization_diagnostics;
use chainpolar::Error;

#[derive(Parser)]
#[command(name = "chainpolar", version, about = "Chained polar codes for three-receiver layered broadcast channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Replace every seed in the config by ones derived from this value.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code instance and print its diagnostics.
    Construct {
        #[command(flatten)]
        common: Common,
        /// Scale the rates down until the code fits instead of failing.
        #[arg(long)]
        backoff: bool,
        /// Block length exponent, overriding the config.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Encode public and private message bit files into a codeword bit file.
    Encode {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        public: PathBuf,
        #[arg(long)]
        private: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pass a codeword through the config's channel for one receiver.
    Transmit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        receiver: u8,
    },
    /// Decode one receiver's observations.
    Decode {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        receiver: u8,
        /// A bit file of binary outputs, or an observations JSON file.
        #[arg(long)]
        observations: PathBuf,
        /// Recovered public message.
        #[arg(long)]
        out: PathBuf,
        /// Recovered private message (receiver 1 only).
        #[arg(long)]
        private_out: Option<PathBuf>,
    },
    /// Block error rates over the config's exponents.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        backoff: bool,
        /// Also write the per-receiver table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Distance of the encoder output law from the target law.
    Tv {
        #[command(flatten)]
        common: Common,
    },
    /// Frontier of achievable rate pairs over a distribution grid.
    Region {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Run the property checks; fails if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    /// Bad input or infeasible request: exit code 2.
    Input(String),
    /// Exit code 1.
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_bit_input(path: &Path) -> Result<Vec<u8>, Failure> {
    if !path.exists() {
        return Err(Failure::Input(format!("{}: no such file", path.display())));
    }
    Ok(read_bits(path)?)
}

fn load_config(c: &Common) -> Result<ConfigDocument, Failure> {
    let mut doc = ConfigDocument::parse(&read_input(&c.config)?)?;
    if let Some(s) = c.seed {
        doc.override_seed(s);
    }
    Ok(doc)
}

fn load_instance(path: &Path) -> Result<CodeInstance, Failure> {
    Ok(CodeInstance::from_json(&read_input(path)?)?)
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Internal(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_construct(common: &Common, backoff: bool, n: Option<u32>) -> Outcome {
    let doc = load_config(common)?;
    let mut cfg = doc.experiment()?;
    cfg.backoff |= backoff;
    let n = match n {
        Some(n) => n,
        None => doc.construct_n()?,
    };
    let inst = construct(&cfg.construction_params(n)?)?;
    let diag = polarization_diagnostics(&inst.sets, &inst.layered, &inst.channel);
    let realized = inst.realized_rates();
    eprintln!("case {}", inst.layout.case_tag);
    eprintln!(
        "public bits {}, private bits {}, realized rates ({:.6}, {:.6}), backoff factor {:.6}",
        inst.budget.public_total, inst.budget.private_total, realized.r0, realized.r1, inst.backoff_factor
    );
    eprint!("{diag}");
    emit(common.out.as_deref(), &(inst.to_json()? + "\n"))
}

fn cmd_encode(instance: &Path, public: &Path, private: &Path, out: &Path) -> Outcome {
    let inst = load_instance(instance)?;
    let public = read_bit_input(public)?;
    let private = read_bit_input(private)?;
    let blocks = encode_chain(&inst, &public, &private)?;
    let x: Vec<u8> = blocks.iter().flat_map(|b| b.x.iter().copied()).collect();
    Ok(write_bits(out, &x)?)
}

fn cmd_transmit(common: &Common, instance: &Path, input: &Path, receiver: u8) -> Outcome {
    check_receiver(receiver)?;
    let doc = load_config(common)?;
    let cfg = doc.experiment()?;
    let inst = load_instance(instance)?;
    let x = read_bit_input(input)?;
    let len = inst.block_len();
    if x.len() != inst.k * len {
        return Err(Failure::Input(format!("codeword holds {} bits, expected {}", x.len(), inst.k * len)));
    }
    let mut rng = stream(cfg.seeds.trials, u64::from(receiver));
    let blocks = x
        .chunks(len)
        .map(|b| cfg.physical_channel().transmit(b, &mut rng).for_receiver(receiver).to_vec())
        .collect();
    let obs = Observations { receiver, blocks };
    emit(common.out.as_deref(), &to_versioned_json("observations", &obs)?)
}

fn check_receiver(j: u8) -> Outcome {
    if (1..=3).contains(&j) {
        Ok(())
    } else {
        Err(Failure::Input(format!("receiver must be 1, 2 or 3, got {j}")))
    }
}

fn cmd_decode(instance: &Path, receiver: u8, observations: &Path, out: &Path, private_out: Option<&Path>) -> Outcome {
    check_receiver(receiver)?;
    let inst = load_instance(instance)?;
    let len = inst.block_len();
    let blocks: Vec<Vec<usize>> = if observations.extension().is_some_and(|e| e == "json") {
        let obs: Observations = chainpolar::io::from_versioned_json("observations", &read_input(observations)?)?;
        if obs.receiver != receiver {
            return Err(Failure::Input(format!(
                "observations belong to receiver {}, not {receiver}",
                obs.receiver
            )));
        }
        obs.blocks
    } else {
        let bits = read_bit_input(observations)?;
        if bits.len() != inst.k * len {
            return Err(Failure::Input(format!(
                "observation file holds {} bits, expected {}",
                bits.len(),
                inst.k * len
            )));
        }
        bits.chunks(len).map(|b| b.iter().map(|&v| v as usize).collect()).collect()
    };
    let ysize = inst.channel.y_size(receiver);
    if blocks.len() != inst.k || blocks.iter().any(|b| b.len() != len || b.iter().any(|&y| y >= ysize)) {
        return Err(Failure::Input(format!(
            "expected {} blocks of {len} symbols below {ysize}",
            inst.k
        )));
    }
    let ys: Vec<&[usize]> = blocks.iter().map(Vec::as_slice).collect();
    let dec = Decoder::new(&inst, &inst.channel).decode(receiver, &ys);
    write_bits(out, &dec.public)?;
    if let (Some(p), Some(bits)) = (private_out, dec.private.as_ref()) {
        write_bits(p, bits)?;
    }
    Ok(())
}

fn cmd_simulate(common: &Common, backoff: bool, csv: Option<&Path>) -> Outcome {
    let doc = load_config(common)?;
    let mut cfg = doc.experiment()?;
    cfg.backoff |= backoff;
    if cfg.ns.is_empty() {
        return Err(Failure::Input("experiment.n_list is empty".into()));
    }
    let report = run_error_rate(&cfg)?;
    for p in &report.points {
        let rates: Vec<String> = p.receivers.iter().map(|t| format!("{:.4}", t.rate)).collect();
        eprintln!("n={} case {} error rates {} joint {:.4}", p.n, p.case_tag, rates.join(" "), p.joint.rate);
    }
    if let Some(path) = csv {
        fs::write(path, report.to_csv()?).map_err(|e| Failure::Internal(e.to_string()))?;
    }
    emit(common.out.as_deref(), &to_versioned_json("error-rate", &report)?)
}

fn cmd_tv(common: &Common) -> Outcome {
    let doc = load_config(common)?;
    let report = run_tv_trend(&doc.tv_config()?)?;
    emit(common.out.as_deref(), &to_versioned_json("tv-trend", &report)?)
}

fn cmd_region(common: &Common, resolution: Option<usize>) -> Outcome {
    let doc = load_config(common)?;
    let ch = doc.channel.build()?;
    let points = sweep_region(&ch, resolution.unwrap_or(doc.region_resolution()))?;
    emit(common.out.as_deref(), &region_csv(&points)?)
}

fn cmd_verify(common: &Common) -> Outcome {
    let doc = load_config(common)?;
    let report = run_verify(&doc.verify_config()?)?;
    for c in &report.checks {
        eprintln!(
            "{} {} ({} cases, {} failures): {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.failures,
            c.detail
        );
    }
    emit(common.out.as_deref(), &to_versioned_json("verify", &report)?)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Internal("some checks failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Construct { common, backoff, n } => cmd_construct(common, *backoff, *n),
        Command::Encode {
            instance,
            public,
            private,
            out,
        } => cmd_encode(instance, public, private, out),
        Command::Transmit {
            common,
            instance,
            input,
            receiver,
        } => cmd_transmit(common, instance, input, *receiver),
        Command::Decode {
            instance,
            receiver,
            observations,
            out,
            private_out,
        } => cmd_decode(instance, *receiver, observations, out, private_out.as_deref()),
        Command::Simulate { common, backoff, csv } => cmd_simulate(common, *backoff, csv.as_deref()),
        Command::Tv { common } => cmd_tv(common),
        Command::Region { common, resolution } => cmd_region(common, *resolution),
        Command::Verify { common } => cmd_verify(common),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
