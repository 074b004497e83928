use crate::error::{Error, Result};

/// Checks that `len` is a power of two and returns its exponent.
pub fn log2_len(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

/// `x = u G_N` over GF(2) with `G_N = F^{⊗n}`, `F = [[1,0],[1,1]]`, natural order.
pub fn polar_transform(u: &[u8]) -> Result<Vec<u8>> {
    let mut x = u.to_vec();
    polar_transform_in_place(&mut x)?;
    Ok(x)
}

pub fn polar_transform_in_place(x: &mut [u8]) -> Result<()> {
    log2_len(x.len())?;
    let n = x.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for j in start..start + h {
                x[j] ^= x[j + h];
            }
        }
        h *= 2;
    }
    Ok(())
}

/// The transform on bit-packed words (bit `i` of the word is position `i`).
pub fn polar_transform_word(mut x: u64, n: u32) -> u64 {
    let len = 1usize << n;
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for j in start..start + h {
                let b = (x >> (j + h)) & 1;
                x ^= b << j;
            }
        }
        h *= 2;
    }
    x
}
