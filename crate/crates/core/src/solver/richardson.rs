use serde::Serialize;

use super::mesh::{triangulate, Mesh};
use super::torsion::{solve_torsion, TorsionResult, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::parallel::WeightProfile;

/// Torsion values on a nested mesh sequence and their extrapolation.
#[derive(Debug, Clone, Serialize)]
pub struct RichardsonResult {
    pub h: Vec<f64>,
    pub t: Vec<f64>,
    pub nodes: Vec<usize>,
    pub extrapolated: f64,
    /// `|T_h - T_{h/2}|` on the two finest levels.
    pub error_estimate: f64,
    /// Order used for extrapolation.
    pub order: f64,
    /// `log2` of the ratio of successive differences on the three finest levels.
    pub observed_order: f64,
    #[serde(skip)]
    pub finest: Option<TorsionResult>,
}

impl RichardsonResult {
    pub fn finest_t(&self) -> f64 {
        *self.t.last().expect("at least three levels")
    }
}

/// Solves on `h_list[0]` and on successive uniform refinements, then extrapolates.
///
/// `h_list` must hold at least three values, each half the previous. The first mesh comes
/// from [`triangulate`]; the others split every triangle into four, so the discrete spaces
/// are nested. For `p = 2` second-order convergence is assumed; for other `p` the observed
/// order, clamped to `[1, 3]`, is used.
pub fn richardson_t(poly: &ConvexPolygon, f: &WeightProfile, p: f64, h_list: &[f64]) -> Result<RichardsonResult> {
    if h_list.len() < 3 {
        return Err(Error::BadParameter(format!("need at least 3 mesh sizes, got {}", h_list.len())));
    }
    for w in h_list.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(Error::BadParameter(format!("mesh sizes must halve: {} -> {}", w[0], w[1])));
        }
    }
    let mut mesh: Mesh = triangulate(poly, h_list[0])?;
    let mut t = Vec::with_capacity(h_list.len());
    let mut nodes = Vec::with_capacity(h_list.len());
    let mut finest = None;
    for level in 0..h_list.len() {
        if level > 0 {
            mesh = mesh.refine_uniform()?;
        }
        let r = solve_torsion(&mesh, f, p, DEFAULT_TOL)?;
        t.push(r.torsion);
        nodes.push(mesh.node_count());
        if level + 1 == h_list.len() {
            finest = Some(r);
        }
    }
    extrapolate(h_list, t, nodes, p).map(|mut r| {
        r.finest = finest;
        r
    })
}

/// Extrapolation from a sequence of values on halving mesh sizes.
pub fn extrapolate(h: &[f64], t: Vec<f64>, nodes: Vec<usize>, p: f64) -> Result<RichardsonResult> {
    let n = t.len();
    let diffs: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let sign = diffs[0].signum();
    if diffs.iter().any(|d| d.signum() != sign || *d == 0.0) {
        return Err(Error::NonMonotoneConvergence(t));
    }
    let (d1, d2) = (diffs[n - 3], diffs[n - 2]);
    let observed_order = (d1 / d2).log2();
    let order = if p == 2.0 {
        2.0
    } else if observed_order.is_finite() {
        observed_order.clamp(1.0, 3.0)
    } else {
        1.0
    };
    let extrapolated = t[n - 1] + d2 / (2f64.powf(order) - 1.0);
    Ok(RichardsonResult {
        h: h.to_vec(),
        error_estimate: d2.abs(),
        extrapolated,
        order,
        observed_order,
        t,
        nodes,
        finest: None,
    })
}

/// Three halving mesh sizes whose finest level has roughly `finest_nodes` nodes, with the
/// coarsest size never above half the inradius.
pub fn default_h_list(poly: &ConvexPolygon, finest_nodes: usize) -> Vec<f64> {
    let m = poly.metrics();
    // The refined Delaunay mesh carries about 2.3 area/h² nodes.
    let h_fine = (2.3 * m.area / finest_nodes as f64).sqrt();
    let h0 = (4.0 * h_fine).min(0.5 * m.inradius);
    vec![h0, h0 / 2.0, h0 / 4.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_of_exact_quadratic_sequence() {
        let h = [0.4, 0.2, 0.1];
        let t: Vec<f64> = h.iter().map(|h| 1.0 - 3.0 * h * h).collect();
        let r = extrapolate(&h, t, vec![0; 3], 2.0).unwrap();
        assert!((r.extrapolated - 1.0).abs() < 1e-14);
        assert!((r.observed_order - 2.0).abs() < 1e-12);
        assert!((r.error_estimate - 3.0 * (0.04 - 0.01)).abs() < 1e-14);
    }

    #[test]
    fn observed_order_used_off_two() {
        let h = [0.4, 0.2, 0.1];
        let t: Vec<f64> = h.iter().map(|h: &f64| 2.0 + h.powf(1.5)).collect();
        let r = extrapolate(&h, t, vec![0; 3], 3.0).unwrap();
        assert!((r.order - 1.5).abs() < 1e-12);
        assert!((r.extrapolated - 2.0).abs() < 1e-13);
    }

    #[test]
    fn oscillation_is_reported() {
        let r = extrapolate(&[0.4, 0.2, 0.1], vec![1.0, 1.1, 1.05], vec![0; 3], 2.0);
        assert!(matches!(r, Err(Error::NonMonotoneConvergence(_))));
    }

    #[test]
    fn sizes_must_halve() {
        let sq = ConvexPolygon::from_vertices(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        assert!(richardson_t(&sq, &WeightProfile::UNIT, 2.0, &[0.2, 0.1]).is_err());
        assert!(richardson_t(&sq, &WeightProfile::UNIT, 2.0, &[0.3, 0.1, 0.05]).is_err());
    }
}
