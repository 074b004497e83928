//! Grid exploration of the achievable `(r0, r1)` pairs over layered distributions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::BroadcastChannel;
use crate::error::{Error, Result};
use crate::prob::LayeredDistribution;
use crate::region::profile;

/// One vertex of one distribution's region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub r0: f64,
    pub r1: f64,
    pub pw1: f64,
    pub pv1_given_w0: f64,
    pub pv1_given_w1: f64,
    pub px1_given_v0: f64,
    pub px1_given_v1: f64,
}

/// Vertices of the region of one distribution on the nonnegative quadrant.
fn vertices(layered: &LayeredDistribution, ch: &BroadcastChannel) -> Vec<(f64, f64)> {
    let p = profile(layered, ch);
    let r0_max = p.i_w_y2.min(p.i_v_y3).max(0.0);
    let sum = (p.i_v_y3 + p.i_x_y1_given_v).max(0.0);
    let r1_max = p.i_x_y1_given_w.min(sum).max(0.0);
    let mut out = vec![(0.0, r1_max), (r0_max, (sum - r0_max).min(r1_max).max(0.0))];
    // where the sum-rate face meets the private-rate face
    let kink = sum - p.i_x_y1_given_w;
    if kink > 0.0 && kink < r0_max {
        out.push((kink, p.i_x_y1_given_w));
    }
    out
}

/// Points not dominated in both coordinates by another point, sorted by `r0`.
pub fn pareto_frontier(points: &[RegionPoint]) -> Vec<RegionPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.r0.total_cmp(&a.r0).then(b.r1.total_cmp(&a.r1)));
    let mut out: Vec<RegionPoint> = Vec::new();
    let mut best_r1 = f64::NEG_INFINITY;
    for p in sorted {
        if p.r1 > best_r1 + 1e-12 {
            best_r1 = p.r1;
            out.push(p);
        }
    }
    out.reverse();
    out
}

/// Evaluates every distribution on the grid `{0, 1/(m-1), ..., 1}^5`, with
/// `m = resolution`, and returns the frontier of the union of their regions.
pub fn sweep_region(ch: &BroadcastChannel, resolution: usize) -> Result<Vec<RegionPoint>> {
    if resolution < 2 {
        return Err(Error::Config("region grid resolution must be at least 2".into()));
    }
    let m = resolution;
    let step = |i: usize| i as f64 / (m - 1) as f64;
    let cells = m.pow(5);
    let points: Vec<RegionPoint> = (0..cells)
        .into_par_iter()
        .flat_map_iter(|c| {
            let d: Vec<f64> = (0..5).map(|k| step((c / m.pow(k)) % m)).collect();
            let layered = LayeredDistribution::from_params(d[0], [d[1], d[2]], [d[3], d[4]])
                .expect("grid parameters are probabilities");
            vertices(&layered, ch)
                .into_iter()
                .map(move |(r0, r1)| RegionPoint {
                    r0,
                    r1,
                    pw1: d[0],
                    pv1_given_w0: d[1],
                    pv1_given_w1: d[2],
                    px1_given_v0: d[3],
                    px1_given_v1: d[4],
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(pareto_frontier(&points))
}

pub fn region_csv(points: &[RegionPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{bsc_channel, noiseless_channel};

    fn near(points: &[RegionPoint], r0: f64, r1: f64) -> bool {
        points.iter().any(|p| (p.r0 - r0).abs() < 1e-9 && (p.r1 - r1).abs() < 1e-9)
    }

    #[test]
    fn noiseless_frontier_reaches_both_axes() {
        let f = sweep_region(&noiseless_channel(), 3).unwrap();
        assert!(near(&f, 1.0, 0.0));
        assert!(near(&f, 0.0, 1.0));
    }

    #[test]
    fn useless_channel_collapses_to_origin() {
        let f = sweep_region(&bsc_channel(0.5, 0.5, 0.0).unwrap(), 3).unwrap();
        assert!(f.iter().all(|p| p.r0.abs() < 1e-9 && p.r1.abs() < 1e-9));
    }

    #[test]
    fn bsc_frontier_is_monotone() {
        let f = sweep_region(&bsc_channel(0.05, 0.15, 0.05).unwrap(), 5).unwrap();
        assert!(f.len() >= 2);
        for w in f.windows(2) {
            assert!(w[1].r0 > w[0].r0 && w[1].r1 < w[0].r1);
        }
    }

    #[test]
    fn frontier_drops_dominated_points() {
        let mk = |r0, r1| RegionPoint {
            r0,
            r1,
            pw1: 0.0,
            pv1_given_w0: 0.0,
            pv1_given_w1: 0.0,
            px1_given_v0: 0.0,
            px1_given_v1: 0.0,
        };
        let f = pareto_frontier(&[mk(0.0, 1.0), mk(0.5, 0.5), mk(0.4, 0.4), mk(1.0, 0.0)]);
        assert_eq!(f.len(), 3);
        assert!(!near(&f, 0.4, 0.4));
    }
}
