//! Successive-cancellation recursion over probability pairs.
//!
//! The engine carries several "tracks" in lockstep (for example the source
//! prior and one or more receiver posteriors). Every track sees the same bit
//! decisions, so a single pass yields all conditionals along one path.

/// Likelihood pair `[P(0), P(1)]`, normalized to sum to one.
pub type Pair = [f64; 2];

#[inline]
fn normalize(a: f64, b: f64) -> Pair {
    let s = a + b;
    if s > 0.0 && s.is_finite() {
        [a / s, b / s]
    } else {
        [0.5, 0.5]
    }
}

/// Reusable SC workspace for block length `2^n` and a fixed number of tracks.
pub struct ScEngine {
    n: u32,
    tracks: usize,
    /// Level `d` holds `tracks` rows of `N >> d` pairs.
    probs: Vec<Vec<Pair>>,
    bits: Vec<Vec<u8>>,
    leaf: Vec<Pair>,
}

impl ScEngine {
    pub fn new(n: u32, tracks: usize) -> Self {
        let len = 1usize << n;
        let probs = (0..=n).map(|d| vec![[0.5, 0.5]; tracks * (len >> d)]).collect();
        let bits = (0..=n).map(|d| vec![0u8; len >> d]).collect();
        Self {
            n,
            tracks,
            probs,
            bits,
            leaf: vec![[0.5, 0.5]; tracks],
        }
    }

    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    pub fn tracks(&self) -> usize {
        self.tracks
    }

    /// Runs one pass. `channel` holds `tracks` rows of `N` unnormalized pairs
    /// (track-major). `decide(i, pairs)` receives the normalized conditional of
    /// `u_i` on every track and returns the bit to fix. Returns `x = u G_N`.
    pub fn run<F>(&mut self, channel: &[Pair], mut decide: F) -> &[u8]
    where
        F: FnMut(usize, &[Pair]) -> u8,
    {
        let len = self.block_len();
        assert_eq!(channel.len(), self.tracks * len, "channel rows do not match engine shape");
        for (dst, src) in self.probs[0].iter_mut().zip(channel) {
            *dst = normalize(src[0], src[1]);
        }
        self.descend(0, 0, &mut decide);
        &self.bits[0]
    }

    fn descend<F>(&mut self, depth: usize, first: usize, decide: &mut F)
    where
        F: FnMut(usize, &[Pair]) -> u8,
    {
        let m = self.block_len() >> depth;
        if m == 1 {
            for t in 0..self.tracks {
                self.leaf[t] = self.probs[depth][t];
            }
            let b = decide(first, &self.leaf);
            self.bits[depth][0] = b & 1;
            return;
        }
        let h = m / 2;
        self.combine_left(depth, h);
        self.descend(depth + 1, first, decide);
        let (upper, lower) = self.bits.split_at_mut(depth + 1);
        upper[depth][..h].copy_from_slice(&lower[0][..h]);
        self.combine_right(depth, h);
        self.descend(depth + 1, first + h, decide);
        let (upper, lower) = self.bits.split_at_mut(depth + 1);
        let (out, child) = (&mut upper[depth], &lower[0]);
        for j in 0..h {
            let d = child[j];
            out[j] ^= d;
            out[h + j] = d;
        }
    }

    fn combine_left(&mut self, depth: usize, h: usize) {
        let (upper, lower) = self.probs.split_at_mut(depth + 1);
        let (src, dst) = (&upper[depth], &mut lower[0]);
        for t in 0..self.tracks {
            let s = &src[t * 2 * h..(t + 1) * 2 * h];
            let d = &mut dst[t * h..(t + 1) * h];
            for j in 0..h {
                let (a, b) = (s[j], s[j + h]);
                d[j] = normalize(a[0] * b[0] + a[1] * b[1], a[1] * b[0] + a[0] * b[1]);
            }
        }
    }

    fn combine_right(&mut self, depth: usize, h: usize) {
        let (upper, lower) = self.probs.split_at_mut(depth + 1);
        let (src, dst) = (&upper[depth], &mut lower[0]);
        let c = &self.bits[depth];
        for t in 0..self.tracks {
            let s = &src[t * 2 * h..(t + 1) * 2 * h];
            let d = &mut dst[t * h..(t + 1) * h];
            for j in 0..h {
                let (a, b) = (s[j], s[j + h]);
                let cj = c[j] as usize;
                d[j] = normalize(a[cj] * b[0], a[cj ^ 1] * b[1]);
            }
        }
    }
}
