//! The command-line binary: exit codes, file round trips and golden output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chainpolar::io::{pack_bits, read_bits};

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainpolar")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn noiseless_with(extra: &str) -> String {
    std::fs::read_to_string(repo_file("configs/noiseless.toml")).unwrap() + extra
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("c.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn construct(dir: &Path, config: &Path) -> PathBuf {
    let inst = dir.join("inst.json");
    let out = run(&["construct", "--config", s(config), "--out", s(&inst)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    inst
}

#[test]
fn noiseless_instance_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let inst = construct(dir.path(), &repo_file("configs/noiseless.toml"));
    let got = std::fs::read_to_string(inst).unwrap();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/noiseless_instance.json");
    if std::env::var_os("CHAINPOLAR_BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(path).unwrap());
}

#[test]
fn noiseless_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = repo_file("configs/noiseless.toml");
    let inst = construct(d, &config);
    let parsed = chainpolar::codec::CodeInstance::from_json(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    let public: Vec<u8> = (0..parsed.budget.public_total).map(|i| (i % 3 == 1) as u8).collect();
    let private: Vec<u8> = (0..parsed.budget.private_total).map(|i| (i % 2) as u8).collect();
    std::fs::write(d.join("pub.bin"), pack_bits(&public)).unwrap();
    std::fs::write(d.join("priv.bin"), pack_bits(&private)).unwrap();
    let cw = d.join("cw.bin");
    let out = run(&[
        "encode", "--instance", s(&inst), "--public", s(&d.join("pub.bin")), "--private",
        s(&d.join("priv.bin")), "--out", s(&cw),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for j in ["1", "2", "3"] {
        let obs = d.join(format!("y{j}.json"));
        let out = run(&[
            "transmit", "--config", s(&config), "--instance", s(&inst), "--input", s(&cw), "--receiver", j,
            "--out", s(&obs),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let (m0, m1) = (d.join("m0.bin"), d.join("m1.bin"));
        let mut args = vec![
            "decode", "--instance", s(&inst), "--receiver", j, "--observations", s(&obs), "--out", s(&m0),
        ];
        if j == "1" {
            args.extend(["--private-out", s(&m1)]);
        }
        let out = run(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(read_bits(&m0).unwrap(), public, "receiver {j}");
        if j == "1" {
            assert_eq!(read_bits(&m1).unwrap(), private);
        }
    }
}

#[test]
fn zero_rates_construct_without_messages() {
    let dir = tempfile::tempdir().unwrap();
    let text = noiseless_with("").replace("r0 = 0.05", "r0 = 0.0").replace("r1 = 0.03", "r1 = 0.0");
    let config = write_config(dir.path(), &text);
    let inst = construct(dir.path(), &config);
    let parsed = chainpolar::codec::CodeInstance::from_json(&std::fs::read_to_string(inst).unwrap()).unwrap();
    assert_eq!(parsed.layout.case_tag, chainpolar::codec::CaseTag::B2);
    assert_eq!((parsed.budget.public_total, parsed.budget.private_total), (0, 0));
}

#[test]
fn rates_outside_the_region_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &noiseless_with("").replace("r0 = 0.05", "r0 = 1.5"));
    let out = run(&["construct", "--config", s(&config), "--out", s(&dir.path().join("i.json"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("public rate"));
}

#[test]
fn truncated_message_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let inst = construct(d, &repo_file("configs/noiseless.toml"));
    let mut bytes = pack_bits(&[1, 0, 1, 1, 0, 0, 1, 0, 1]);
    bytes.truncate(bytes.len() - 1);
    std::fs::write(d.join("pub.bin"), bytes).unwrap();
    std::fs::write(d.join("priv.bin"), pack_bits(&[])).unwrap();
    let out = run(&[
        "encode", "--instance", s(&inst), "--public", s(&d.join("pub.bin")), "--private",
        s(&d.join("priv.bin")), "--out", s(&d.join("cw.bin")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_config_keys_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &noiseless_with("\n[extra]\nx = 1\n"));
    let out = run(&["simulate", "--config", s(&config)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn noiseless_simulation_has_no_errors() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out = run(&["simulate", "--config", s(&repo_file("configs/noiseless.toml")), "--out", s(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let points = v["data"]["points"].as_array().unwrap();
    assert!(!points.is_empty());
    for p in points {
        assert_eq!(p["joint"]["errors"], 0);
    }
}

#[test]
fn noiseless_region_reaches_both_axes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("region.csv");
    let out = run(&["region", "--config", s(&repo_file("configs/noiseless.toml")), "--out", s(&csv)]);
    assert_eq!(code(&out), 0);
    let mut reader = csv::Reader::from_path(csv).unwrap();
    let pts: Vec<(f64, f64)> = reader
        .deserialize::<std::collections::HashMap<String, f64>>()
        .map(|r| {
            let r = r.unwrap();
            (r["r0"], r["r1"])
        })
        .collect();
    let near = |a: f64, b: f64| pts.iter().any(|p| (p.0 - a).abs() < 1e-6 && (p.1 - b).abs() < 1e-6);
    assert!(near(1.0, 0.0) && near(0.0, 1.0), "{pts:?}");
}
