//! Layout bookkeeping, instance serialization and golden codewords.

mod common;

use std::path::PathBuf;

use chainpolar::codec::{encode_chain, CaseTag, CodeInstance};
use chainpolar::Error;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares against a frozen file; `CHAINPOLAR_BLESS=1` rewrites it.
fn assert_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("CHAINPOLAR_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, want, "{name} differs from the frozen copy");
}

fn message(len: usize, stride: usize) -> Vec<u8> {
    (0..len).map(|i| ((i * stride + i / 3) % 2) as u8).collect()
}

// With |A| = 16 and |D'| = 4 on the synthetic sets and k = 3, the totals
// follow from the per-block counts by hand.
#[test]
fn budgets_follow_the_case_formulas() {
    let stats = common::synthetic_stats();
    let want = [
        (CaseTag::A1, 2 * 26 + 16, 2 * 7 + 4),
        (CaseTag::A2, 2 * 26 + 16, 3 * 3),
        (CaseTag::B1, 2 * 20 + 16, 3 * 5),
        (CaseTag::B2, 3 * 10, 3 * 5),
    ];
    for (tag, public, private) in want {
        let inst = common::synthetic_instance(&stats, tag, 3);
        assert_eq!((inst.budget.public_total, inst.budget.private_total), (public, private), "{tag}");
        assert_eq!(inst.layout.public_slots().len(), public, "{tag}");
        assert_eq!(inst.layout.private_slots().len(), private, "{tag}");
    }
}

#[test]
fn single_block_has_no_links() {
    let stats = common::synthetic_stats();
    let inst = common::synthetic_instance(&stats, CaseTag::B1, 1);
    // only |A| = 16 public bits have a home without a following block
    assert_eq!(inst.budget.public_total, 16);
    assert!(inst.layout.copy_links.is_empty());
    let blocks = encode_chain(&inst, &message(16, 1), &message(5, 3)).unwrap();
    assert_eq!(blocks.len(), 1);
}

#[test]
fn instance_survives_json() {
    let stats = common::synthetic_stats();
    for tag in CaseTag::ALL {
        let inst = common::synthetic_instance(&stats, tag, 3);
        let back = CodeInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(back, inst);
    }
}

#[test]
fn wrong_message_lengths_are_rejected() {
    let stats = common::synthetic_stats();
    let inst = common::synthetic_instance(&stats, CaseTag::A2, 3);
    let (p, q) = (inst.budget.public_total, inst.budget.private_total);
    for (a, b) in [(p - 1, q), (p, q + 1), (0, 0)] {
        let err = encode_chain(&inst, &message(a, 1), &message(b, 1)).unwrap_err();
        assert!(matches!(err, Error::MessageLength(_)), "{err}");
    }
}

#[test]
fn a1_codewords_match_frozen_vectors() {
    let stats = common::synthetic_stats();
    let inst = common::synthetic_instance(&stats, CaseTag::A1, 3);
    let public = message(inst.budget.public_total, 5);
    let private = message(inst.budget.private_total, 7);
    let blocks = encode_chain(&inst, &public, &private).unwrap();
    let mut text = String::new();
    for b in &blocks {
        for seq in [&b.w, &b.v, &b.x] {
            text.extend(seq.iter().map(|&v| char::from(b'0' + v)));
            text.push('\n');
        }
    }
    assert_golden("a1_codewords.txt", &text);
}
