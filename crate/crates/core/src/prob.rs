//! Exact finite-alphabet probability machinery.
//!
//! Everything here works in bits (log base 2). The conventions `0·log 0 = 0`
//! and "skip the term when a conditional is 0/0" apply throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance applied when validating that masses sum to one.
pub const NORMALIZATION_TOL: f64 = 1e-12;

fn check_masses(what: &str, mass: &[f64]) -> Result<()> {
    if mass.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what}: empty support")));
    }
    if let Some(bad) = mass.iter().find(|m| !m.is_finite() || **m < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "{what}: entry {bad} is negative or not finite"
        )));
    }
    let total: f64 = mass.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what}: masses sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// A probability mass function over `{0, .., support_size - 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    mass: Vec<f64>,
}

impl Pmf {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        check_masses("pmf", &mass)?;
        Ok(Self { mass })
    }

    /// Bernoulli law with `P(1) = p1`.
    pub fn bernoulli(p1: f64) -> Result<Self> {
        Self::new(vec![1.0 - p1, p1])
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("pmf: empty support".into()));
        }
        Ok(Self {
            mass: vec![1.0 / size as f64; size],
        })
    }

    pub fn support_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn p(&self, i: usize) -> f64 {
        self.mass[i]
    }
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Self {
        p.mass
    }
}

/// A row-stochastic matrix: row `r` is the law of the output given input `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ConditionalPmf {
    input_size: usize,
    output_size: usize,
    rows: Vec<f64>,
}

impl ConditionalPmf {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::InvalidDistribution("conditional pmf: no rows".into()));
        }
        let output_size = rows[0].len();
        let mut flat = Vec::with_capacity(input_size * output_size);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::DimensionMismatch(format!(
                    "conditional pmf row {r} has {} entries, expected {output_size}",
                    row.len()
                )));
            }
            check_masses(&format!("conditional pmf row {r}"), row)?;
            flat.extend_from_slice(row);
        }
        Ok(Self {
            input_size,
            output_size,
            rows: flat,
        })
    }

    pub fn identity(size: usize) -> Self {
        let mut rows = vec![0.0; size * size];
        for i in 0..size {
            rows[i * size + i] = 1.0;
        }
        Self {
            input_size: size,
            output_size: size,
            rows,
        }
    }

    /// Binary symmetric channel with crossover `eps`.
    pub fn bsc(eps: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])
    }

    /// Binary erasure channel; output symbol 2 is the erasure.
    pub fn bec(eps: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - eps, 0.0, eps], vec![0.0, 1.0 - eps, eps]])
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, input: usize) -> &[f64] {
        &self.rows[input * self.output_size..(input + 1) * self.output_size]
    }

    pub fn p(&self, input: usize, output: usize) -> f64 {
        self.rows[input * self.output_size + output]
    }

    /// Matrix product `self` then `next`: the kernel of input → next's output.
    pub fn compose(&self, next: &ConditionalPmf) -> Result<ConditionalPmf> {
        if self.output_size != next.input_size {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.input_size, self.output_size, next.input_size, next.output_size
            )));
        }
        let mut rows = vec![0.0; self.input_size * next.output_size];
        for i in 0..self.input_size {
            for m in 0..self.output_size {
                let a = self.p(i, m);
                if a == 0.0 {
                    continue;
                }
                for o in 0..next.output_size {
                    rows[i * next.output_size + o] += a * next.p(m, o);
                }
            }
        }
        Ok(ConditionalPmf {
            input_size: self.input_size,
            output_size: next.output_size,
            rows,
        })
    }

    /// Joint law of (input, output) when the input is drawn from `input`.
    pub fn joint_with(&self, input: &Pmf) -> Result<JointPmf2> {
        if input.support_size() != self.input_size {
            return Err(Error::DimensionMismatch(format!(
                "input pmf has {} symbols, kernel expects {}",
                input.support_size(),
                self.input_size
            )));
        }
        let mut cells = Vec::with_capacity(self.input_size * self.output_size);
        for i in 0..self.input_size {
            for o in 0..self.output_size {
                cells.push(input.p(i) * self.p(i, o));
            }
        }
        JointPmf2::new(self.input_size, self.output_size, cells)
    }
}

impl TryFrom<Vec<Vec<f64>>> for ConditionalPmf {
    type Error = Error;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        ConditionalPmf::new(v)
    }
}

impl From<ConditionalPmf> for Vec<Vec<f64>> {
    fn from(c: ConditionalPmf) -> Self {
        c.rows.chunks(c.output_size).map(|r| r.to_vec()).collect()
    }
}

/// Joint law over a pair (X, Y), stored row-major by X.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf2 {
    nx: usize,
    ny: usize,
    cells: Vec<f64>,
}

impl JointPmf2 {
    pub fn new(nx: usize, ny: usize, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "joint has {} cells, expected {nx}x{ny}",
                cells.len()
            )));
        }
        check_masses("joint", &cells)?;
        Ok(Self { nx, ny, cells })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.cells[x * self.ny + y]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.nx).map(|x| (0..self.ny).map(|y| self.p(x, y)).sum()).collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.ny).map(|y| (0..self.nx).map(|x| self.p(x, y)).sum()).collect()
    }
}

/// Joint law over a triple (X, Y, Z), index `(x * ny + y) * nz + z`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf3 {
    nx: usize,
    ny: usize,
    nz: usize,
    cells: Vec<f64>,
}

impl JointPmf3 {
    pub fn new(nx: usize, ny: usize, nz: usize, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != nx * ny * nz {
            return Err(Error::DimensionMismatch(format!(
                "joint has {} cells, expected {nx}x{ny}x{nz}",
                cells.len()
            )));
        }
        check_masses("joint", &cells)?;
        Ok(Self { nx, ny, nz, cells })
    }

    pub fn p(&self, x: usize, y: usize, z: usize) -> f64 {
        self.cells[(x * self.ny + y) * self.nz + z]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &Pmf) -> f64 {
    p.mass().iter().map(|&m| plogp(m)).sum()
}

/// Binary entropy function `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// `H(X|Y)` for a joint over (X, Y).
pub fn conditional_entropy(joint: &JointPmf2) -> f64 {
    let py = joint.marginal_y();
    let mut h = 0.0;
    for (y, &pyy) in py.iter().enumerate() {
        if pyy <= 0.0 {
            continue;
        }
        for x in 0..joint.nx() {
            let pxy = joint.p(x, y);
            if pxy > 0.0 {
                h -= pxy * (pxy / pyy).log2();
            }
        }
    }
    h
}

/// `I(X;Y) = H(X) - H(X|Y)`.
pub fn mutual_information(joint: &JointPmf2) -> f64 {
    let hx: f64 = joint.marginal_x().iter().map(|&m| plogp(m)).sum();
    hx - conditional_entropy(joint)
}

/// `I(X;Y|Z) = sum_z p(z) I(X;Y|Z=z)`.
pub fn conditional_mutual_information(joint: &JointPmf3) -> f64 {
    let (nx, ny, nz) = joint.dims();
    let mut total = 0.0;
    for z in 0..nz {
        let pz: f64 = (0..nx)
            .flat_map(|x| (0..ny).map(move |y| (x, y)))
            .map(|(x, y)| joint.p(x, y, z))
            .sum();
        if pz <= 0.0 {
            continue;
        }
        let mut px = vec![0.0; nx];
        let mut py = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                let c = joint.p(x, y, z);
                px[x] += c;
                py[y] += c;
            }
        }
        for x in 0..nx {
            for y in 0..ny {
                let c = joint.p(x, y, z);
                if c > 0.0 {
                    // c / pz over (px/pz)(py/pz)
                    total += c * (c * pz / (px[x] * py[y])).log2();
                }
            }
        }
    }
    total
}

/// Bhattacharyya parameter `Z(X|Y) = 2 sum_y sqrt(P(0,y) P(1,y))` for binary X.
pub fn bhattacharyya(joint: &JointPmf2) -> Result<f64> {
    if joint.nx() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "bhattacharyya needs a binary X, got {} symbols",
            joint.nx()
        )));
    }
    Ok((0..joint.ny())
        .map(|y| 2.0 * (joint.p(0, y) * joint.p(1, y)).sqrt())
        .sum())
}

/// Total variation distance `sum_z |P(z) - Q(z)| / 2`.
pub fn tv_distance(p: &Pmf, q: &Pmf) -> Result<f64> {
    tv_slices(p.mass(), q.mass())
}

pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "supports differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// KL divergence `D(P||Q)` in bits; infinite when P is not dominated by Q.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    if p.support_size() != q.support_size() {
        return Err(Error::DimensionMismatch(format!(
            "supports differ: {} vs {}",
            p.support_size(),
            q.support_size()
        )));
    }
    let mut d = 0.0;
    for (&a, &b) in p.mass().iter().zip(q.mass()) {
        if a > 0.0 {
            if b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            d += a * (a / b).log2();
        }
    }
    Ok(d)
}

/// Both sides of the identity `||P_X p(y|x) - Q_X p(y|x)|| = ||P_X - Q_X||`.
///
/// Returns `(lhs, rhs)`: the distance between the two joints formed with the
/// shared channel, and the distance between the input laws.
pub fn tv_channel_extension_identity(
    px: &Pmf,
    qx: &Pmf,
    channel: &ConditionalPmf,
) -> Result<(f64, f64)> {
    let jp = channel.joint_with(px)?;
    let jq = channel.joint_with(qx)?;
    let lhs = tv_slices(jp.cells(), jq.cells())?;
    let rhs = tv_distance(px, qx)?;
    Ok((lhs, rhs))
}

/// Binary joint law `p(w) p(v|w) p(x|v)` of the three superposition layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredDistribution {
    pub pw: Pmf,
    pub pv_given_w: ConditionalPmf,
    pub px_given_v: ConditionalPmf,
}

impl LayeredDistribution {
    pub fn new(pw: Pmf, pv_given_w: ConditionalPmf, px_given_v: ConditionalPmf) -> Result<Self> {
        let binary = pw.support_size() == 2
            && pv_given_w.input_size() == 2
            && pv_given_w.output_size() == 2
            && px_given_v.input_size() == 2
            && px_given_v.output_size() == 2;
        if !binary {
            return Err(Error::DimensionMismatch(
                "layered distribution must be binary in W, V and X".into(),
            ));
        }
        Ok(Self {
            pw,
            pv_given_w,
            px_given_v,
        })
    }

    /// Builds the law from `P(W=1)`, `P(V=1|W=w)` and `P(X=1|V=v)`.
    pub fn from_params(pw1: f64, pv1_given_w: [f64; 2], px1_given_v: [f64; 2]) -> Result<Self> {
        Self::new(
            Pmf::bernoulli(pw1)?,
            ConditionalPmf::new(vec![
                vec![1.0 - pv1_given_w[0], pv1_given_w[0]],
                vec![1.0 - pv1_given_w[1], pv1_given_w[1]],
            ])?,
            ConditionalPmf::new(vec![
                vec![1.0 - px1_given_v[0], px1_given_v[0]],
                vec![1.0 - px1_given_v[1], px1_given_v[1]],
            ])?,
        )
    }

    /// `P(W=w, V=v, X=x)` at index `4w + 2v + x`.
    pub fn joint_wvx(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for w in 0..2 {
            for v in 0..2 {
                for x in 0..2 {
                    out[4 * w + 2 * v + x] =
                        self.pw.p(w) * self.pv_given_w.p(w, v) * self.px_given_v.p(v, x);
                }
            }
        }
        out
    }

    pub fn pv(&self) -> [f64; 2] {
        let j = self.joint_wvx();
        [j[0] + j[1] + j[4] + j[5], j[2] + j[3] + j[6] + j[7]]
    }

    /// Kernel W → X obtained by marginalizing V.
    pub fn px_given_w(&self) -> ConditionalPmf {
        self.pv_given_w
            .compose(&self.px_given_v)
            .expect("binary kernels compose")
    }

    pub fn entropy_w(&self) -> f64 {
        entropy(&self.pw)
    }

    /// `H(V|W)`.
    pub fn entropy_v_given_w(&self) -> f64 {
        (0..2)
            .map(|w| self.pw.p(w) * binary_entropy(self.pv_given_w.p(w, 1)))
            .sum()
    }

    /// `H(X|V)`.
    pub fn entropy_x_given_v(&self) -> f64 {
        let pv = self.pv();
        (0..2)
            .map(|v| pv[v] * binary_entropy(self.px_given_v.p(v, 1)))
            .sum()
    }
}
