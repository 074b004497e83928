//! Sampled channel outputs against the kernels they are drawn from.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use chainpolar::channel::{bsc_channel, make_product_channel, BroadcastChannel};
use chainpolar::prob::ConditionalPmf;

const SAMPLES: usize = 100_000;

fn check_frequencies(ch: &BroadcastChannel, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in 0..2u8 {
        let codeword = vec![x; SAMPLES];
        let out = ch.transmit(&codeword, &mut rng);
        for j in 1..=3u8 {
            let k = ch.kernel(j);
            let mut counts = vec![0usize; ch.y_size(j)];
            for &y in out.for_receiver(j) {
                counts[y] += 1;
            }
            for (y, &c) in counts.iter().enumerate() {
                let freq = c as f64 / SAMPLES as f64;
                let want = k.p(x as usize, y);
                assert!((freq - want).abs() < 0.01, "receiver {j} x {x} y {y}: {freq} vs {want}");
            }
        }
    }
}

#[test]
fn bsc_outputs_match_kernels() {
    check_frequencies(&bsc_channel(0.05, 0.15, 0.1).unwrap(), 1);
}

#[test]
fn ternary_outputs_match_kernels() {
    let k1 = ConditionalPmf::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]]).unwrap();
    let k3 = ConditionalPmf::bec(0.3).unwrap();
    let k2 = ConditionalPmf::new(vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
    check_frequencies(&make_product_channel(&k1, &k3, &k2).unwrap(), 2);
}

#[test]
fn outputs_are_reproducible_from_the_seed() {
    let ch = bsc_channel(0.1, 0.2, 0.1).unwrap();
    let x: Vec<u8> = (0..256).map(|i| (i % 3 == 0) as u8).collect();
    let a = ch.transmit(&x, &mut ChaCha8Rng::seed_from_u64(5));
    let b = ch.transmit(&x, &mut ChaCha8Rng::seed_from_u64(5));
    assert_eq!(a, b);
}
