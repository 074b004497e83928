//! The three-receiver broadcast channel: a joint kernel `x -> (y1, y3)` and a
//! degrading kernel `y1 -> y2`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{ConditionalPmf, LayeredDistribution};

/// Receiver identifiers used across the crate.
pub const RECEIVERS: [u8; 3] = [1, 2, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChannel", into = "RawChannel")]
pub struct BroadcastChannel {
    y1_size: usize,
    y2_size: usize,
    y3_size: usize,
    /// Row `x`, column `y1 * y3_size + y3`.
    k13: ConditionalPmf,
    k2: ConditionalPmf,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    y1_size: usize,
    y3_size: usize,
    k13: ConditionalPmf,
    k2: ConditionalPmf,
}

impl TryFrom<RawChannel> for BroadcastChannel {
    type Error = Error;
    fn try_from(r: RawChannel) -> Result<Self> {
        BroadcastChannel::with_coupling(r.y1_size, r.y3_size, r.k13, r.k2)
    }
}

impl From<BroadcastChannel> for RawChannel {
    fn from(c: BroadcastChannel) -> Self {
        RawChannel {
            y1_size: c.y1_size,
            y3_size: c.y3_size,
            k13: c.k13,
            k2: c.k2,
        }
    }
}

/// One block of outputs, one symbol index per position and receiver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSample {
    pub y1: Vec<usize>,
    pub y2: Vec<usize>,
    pub y3: Vec<usize>,
}

impl ChannelSample {
    pub fn for_receiver(&self, receiver: u8) -> &[usize] {
        match receiver {
            1 => &self.y1,
            2 => &self.y2,
            _ => &self.y3,
        }
    }
}

impl BroadcastChannel {
    /// General coupling: `k13` maps x to the pair index `y1 * y3_size + y3`.
    pub fn with_coupling(
        y1_size: usize,
        y3_size: usize,
        k13: ConditionalPmf,
        k2: ConditionalPmf,
    ) -> Result<Self> {
        if k13.input_size() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "channel input must be binary, kernel has {} rows",
                k13.input_size()
            )));
        }
        if y1_size == 0 || y3_size == 0 || k13.output_size() != y1_size * y3_size {
            return Err(Error::DimensionMismatch(format!(
                "joint kernel has {} outputs, expected {y1_size}x{y3_size}",
                k13.output_size()
            )));
        }
        if k2.input_size() != y1_size {
            return Err(Error::DimensionMismatch(format!(
                "degrading kernel has {} inputs, receiver 1 alphabet has {y1_size}",
                k2.input_size()
            )));
        }
        Ok(Self {
            y1_size,
            y2_size: k2.output_size(),
            y3_size,
            k13,
            k2,
        })
    }

    pub fn y_size(&self, receiver: u8) -> usize {
        match receiver {
            1 => self.y1_size,
            2 => self.y2_size,
            _ => self.y3_size,
        }
    }

    pub fn k13(&self) -> &ConditionalPmf {
        &self.k13
    }

    pub fn k2(&self) -> &ConditionalPmf {
        &self.k2
    }

    /// Marginal kernel `x -> y_j`. Receiver 2's kernel goes through `y1`.
    pub fn kernel(&self, receiver: u8) -> ConditionalPmf {
        let mut c1 = vec![vec![0.0; self.y1_size]; 2];
        let mut c3 = vec![vec![0.0; self.y3_size]; 2];
        for x in 0..2 {
            for y1 in 0..self.y1_size {
                for y3 in 0..self.y3_size {
                    let p = self.k13.p(x, y1 * self.y3_size + y3);
                    c1[x][y1] += p;
                    c3[x][y3] += p;
                }
            }
        }
        let c1 = ConditionalPmf::new(c1).expect("marginal of a valid kernel");
        match receiver {
            1 => c1,
            2 => c1.compose(&self.k2).expect("sizes checked at construction"),
            _ => ConditionalPmf::new(c3).expect("marginal of a valid kernel"),
        }
    }

    /// Draws one block of outputs for the codeword `x`.
    ///
    /// Per position: one uniform draw selects `(y1, y3)` by inverse CDF, a
    /// second selects `y2` given `y1`.
    pub fn transmit<R: Rng + ?Sized>(&self, x: &[u8], rng: &mut R) -> ChannelSample {
        let n = x.len();
        let mut out = ChannelSample {
            y1: Vec::with_capacity(n),
            y2: Vec::with_capacity(n),
            y3: Vec::with_capacity(n),
        };
        for &xi in x {
            let pair = sample_row(self.k13.row(xi as usize), rng.gen::<f64>());
            let y1 = pair / self.y3_size;
            let y3 = pair % self.y3_size;
            let y2 = sample_row(self.k2.row(y1), rng.gen::<f64>());
            out.y1.push(y1);
            out.y2.push(y2);
            out.y3.push(y3);
        }
        out
    }
}

fn sample_row(row: &[f64], r: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if r < acc {
                return i;
            }
        }
    }
    last
}

/// Product coupling: `y1` and `y3` independent given `x`.
pub fn make_product_channel(
    c1: &ConditionalPmf,
    c3: &ConditionalPmf,
    c2: &ConditionalPmf,
) -> Result<BroadcastChannel> {
    if c1.input_size() != 2 || c3.input_size() != 2 {
        return Err(Error::DimensionMismatch(
            "receiver 1 and 3 kernels must take a binary input".into(),
        ));
    }
    let (n1, n3) = (c1.output_size(), c3.output_size());
    let rows = (0..2)
        .map(|x| {
            let mut row = Vec::with_capacity(n1 * n3);
            for y1 in 0..n1 {
                for y3 in 0..n3 {
                    row.push(c1.p(x, y1) * c3.p(x, y3));
                }
            }
            row
        })
        .collect();
    BroadcastChannel::with_coupling(n1, n3, ConditionalPmf::new(rows)?, c2.clone())
}

/// BSC on every link: receiver 1 and 3 crossovers, then the degrading flip.
pub fn bsc_channel(eps1: f64, eps3: f64, flip2: f64) -> Result<BroadcastChannel> {
    make_product_channel(
        &ConditionalPmf::bsc(eps1)?,
        &ConditionalPmf::bsc(eps3)?,
        &ConditionalPmf::bsc(flip2)?,
    )
}

/// All three receivers see `x` exactly.
pub fn noiseless_channel() -> BroadcastChannel {
    let id = ConditionalPmf::identity(2);
    make_product_channel(&id, &id, &id).expect("identity kernels are valid")
}

/// Exact joints of `(W, V, X, Y_j)` for each receiver.
///
/// Cell `(4w + 2v + x) * |Y_j| + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedJoints {
    pub y_sizes: [usize; 3],
    pub cells: [Vec<f64>; 3],
}

impl InducedJoints {
    pub fn receiver(&self, receiver: u8) -> (&[f64], usize) {
        let j = (receiver - 1) as usize;
        (&self.cells[j], self.y_sizes[j])
    }
}

pub fn induced_output_joints(ch: &BroadcastChannel, layered: &LayeredDistribution) -> InducedJoints {
    let wvx = layered.joint_wvx();
    let make = |receiver: u8| {
        let k = ch.kernel(receiver);
        let ny = k.output_size();
        let mut cells = vec![0.0; 8 * ny];
        for (s, &p) in wvx.iter().enumerate() {
            let x = s & 1;
            for y in 0..ny {
                cells[s * ny + y] = p * k.p(x, y);
            }
        }
        (ny, cells)
    };
    let (n1, c1) = make(1);
    let (n2, c2) = make(2);
    let (n3, c3) = make(3);
    InducedJoints {
        y_sizes: [n1, n2, n3],
        cells: [c1, c2, c3],
    }
}
