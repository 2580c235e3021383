//! Quantitative versions of the Pólya-type bound: the width/diameter estimate for every `p`
//! and the rectangle-asymmetry estimate for `p = 2`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::bounds::{c_p, check_exponent, conjugate, functional_f};
use crate::error::{Error, Result};
use crate::geometry::{signed_area, BodyMetrics, ConvexPolygon, Point};

/// `K(p) = (p-1) p / (2^{p/(p-1)} · 3 (3p-2)(2p-1))`.
pub fn k_of_p(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok((p - 1.0) * p / (2f64.powf(conjugate(p)) * 3.0 * (3.0 * p - 2.0) * (2.0 * p - 1.0)))
}

/// The three admissibility conditions on `σ`, each decreasing in `σ`, with `K = K(2)`.
fn sigma_conditions(sigma: f64) -> [f64; 3] {
    let k = 1.0 / 72.0;
    let s = sigma / k;
    [
        1.0 / (64.0 * 6.0) - PI * PI * s * s / (8.0 * 27.0),
        1.0 / (27.0 * 6.0) - PI * s / 48.0 - PI * PI * s * s / (32.0 * 3.0),
        PI / 4.0 - PI * s / (2.0 * 3f64.sqrt()) - 4.0 / (3.0 * 3f64.sqrt()),
    ]
}

/// Largest `σ` allowed by each condition on its own, found by bisection.
pub fn sigma_constraints() -> [f64; 3] {
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let (mut lo, mut hi) = (0.0, 1.0 / 72.0);
        debug_assert!(sigma_conditions(lo)[i] > 0.0 && sigma_conditions(hi)[i] < 0.0);
        while hi - lo > 1e-14 * hi {
            let mid = 0.5 * (lo + hi);
            if sigma_conditions(mid)[i] >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        *o = lo;
    }
    out
}

/// Threshold `σ` separating the small- and large-deficit branches: the largest value
/// satisfying all three conditions.
pub fn sigma_threshold() -> f64 {
    static SIGMA: OnceLock<f64> = OnceLock::new();
    *SIGMA.get_or_init(|| sigma_constraints().into_iter().fold(f64::INFINITY, f64::min))
}

/// Reconstructed constant of the asymmetry estimate, `min(σ/8, 1/384)`.
pub fn k_tilde() -> f64 {
    (sigma_threshold() / 8.0).min(1.0 / 384.0)
}

/// Rectangle with sides `P/2` and `w`, the short side along the minimal-width direction,
/// containing the body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnclosingRectangle {
    pub corners: [Point; 4],
    /// Unit direction of the short side.
    pub short_direction: Point,
    pub short_side: f64,
    pub long_side: f64,
    /// `|Ω △ Q| / |Ω| = P w / (2|Ω|) - 1`.
    pub d: f64,
    /// The same ratio from the shoelace area of the corners.
    pub d_geometric: f64,
}

pub fn enclosing_rectangle(poly: &ConvexPolygon, metrics: &BodyMetrics) -> Result<EnclosingRectangle> {
    let u = metrics.width_direction;
    let v = u.perp();
    let (mut a0, mut a1, mut b0, mut b1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &x in poly.vertices() {
        a0 = a0.min(x.dot(u));
        a1 = a1.max(x.dot(u));
        b0 = b0.min(x.dot(v));
        b1 = b1.max(x.dot(v));
    }
    let mut short = metrics.width;
    let mut long = 0.5 * metrics.perimeter;
    let scale = metrics.diameter;
    let excess = |short: f64, long: f64| {
        let (au, bv) = (0.5 * (a0 + a1), 0.5 * (b0 + b1));
        poly.vertices()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let e = ((x.dot(u) - au).abs() - 0.5 * short).max((x.dot(v) - bv).abs() - 0.5 * long);
                (i, e)
            })
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    };
    let (vertex, e) = excess(short, long);
    if e > 1e-9 * scale {
        return Err(Error::ContainmentFailure { vertex, excess: e });
    }
    if e > 0.0 {
        short += 1e-12 * scale;
        long += 1e-12 * scale;
    }
    let c = u * (0.5 * (a0 + a1)) + v * (0.5 * (b0 + b1));
    let (hu, hv) = (u * (0.5 * short), v * (0.5 * long));
    let corners = [c - hu - hv, c + hu - hv, c + hu + hv, c - hu + hv];
    let d = metrics.perimeter * metrics.width / (2.0 * metrics.area) - 1.0;
    let d_geometric = (signed_area(&corners) - metrics.area) / metrics.area;
    Ok(EnclosingRectangle { corners, short_direction: u, short_side: short, long_side: long, d, d_geometric })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    SmallDeficit,
    LargeDeficit,
}

/// Every quantity entering the two quantitative estimates for one body and one `T`.
///
/// Verdicts are evaluated with `T - t_error`, so a positive slack survives the stated
/// uncertainty of `T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitReport {
    pub p: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub t_error: f64,
    #[serde(rename = "F_p")]
    pub f_p: f64,
    pub c_p: f64,
    pub deficit: f64,
    /// Deficit computed from `T - t_error`.
    pub deficit_lower: f64,
    pub width_over_diameter: f64,
    #[serde(rename = "K_p")]
    pub k_p: f64,
    pub theorem2_bound: f64,
    pub theorem2_slack: f64,
    pub theorem2_ok: bool,
    /// `P R / |Ω| - 1`.
    pub inradius_deficit: f64,
    #[serde(rename = "Q")]
    pub q_rectangle: EnclosingRectangle,
    #[serde(rename = "D")]
    pub d: f64,
    pub sigma: f64,
    #[serde(rename = "K_tilde")]
    pub k_tilde: f64,
    /// The constant `K̃` is not fixed by the theory; this value is a reconstruction.
    pub k_tilde_reconstructed: bool,
    /// The remaining fields are `None` unless `p = 2`.
    pub branch: Option<Branch>,
    pub theorem3_bound: Option<f64>,
    pub theorem3_slack: Option<f64>,
    pub theorem3_ok: Option<bool>,
    pub quantitative_r_bound: Option<f64>,
    pub quantitative_r_ok: Option<bool>,
}

impl DeficitReport {
    /// False if any evaluated verdict fails.
    pub fn all_ok(&self) -> bool {
        self.theorem2_ok && self.theorem3_ok.unwrap_or(true) && self.quantitative_r_ok.unwrap_or(true)
    }
}

/// Width/diameter estimate: `F_p - c_p ≥ K(p) w/diam`. Returns `(bound, slack)` where the
/// slack uses `deficit`.
pub fn theorem2_report(metrics: &BodyMetrics, deficit: f64, p: f64) -> Result<(f64, f64)> {
    let bound = k_of_p(p)? * metrics.width_over_diameter();
    Ok((bound, deficit - bound))
}

/// Asymmetry estimate at `p = 2`. Returns the branch, the `K̃ D³` or `(σ/8) D³` bound with its
/// slack, and on the small branch the `(1/6)(P R/|Ω| - 1)³` bound.
pub fn theorem3_report(metrics: &BodyMetrics, deficit: f64, d: f64) -> (Branch, f64, f64, Option<f64>) {
    let sigma = sigma_threshold();
    if deficit >= sigma {
        let bound = sigma / 8.0 * d.powi(3);
        (Branch::LargeDeficit, bound, deficit - bound, None)
    } else {
        let bound = k_tilde() * d.powi(3);
        let r_def = metrics.perimeter * metrics.inradius / metrics.area - 1.0;
        (Branch::SmallDeficit, bound, deficit - bound, Some(r_def.powi(3) / 6.0))
    }
}

pub fn deficit_report(poly: &ConvexPolygon, t: f64, t_error: f64, p: f64) -> Result<DeficitReport> {
    check_exponent(p)?;
    let m = poly.metrics();
    let cp = c_p(p);
    let f_p = functional_f(t, &m, p);
    let deficit = f_p - cp;
    let deficit_lower = functional_f(t - t_error.abs(), &m, p) - cp;
    let (theorem2_bound, theorem2_slack) = theorem2_report(&m, deficit_lower, p)?;
    let q = enclosing_rectangle(poly, &m)?;
    let mut report = DeficitReport {
        p,
        t,
        t_error: t_error.abs(),
        f_p,
        c_p: cp,
        deficit,
        deficit_lower,
        width_over_diameter: m.width_over_diameter(),
        k_p: k_of_p(p)?,
        theorem2_bound,
        theorem2_slack,
        theorem2_ok: theorem2_slack > 0.0,
        inradius_deficit: m.perimeter * m.inradius / m.area - 1.0,
        q_rectangle: q,
        d: q.d,
        sigma: sigma_threshold(),
        k_tilde: k_tilde(),
        k_tilde_reconstructed: true,
        branch: None,
        theorem3_bound: None,
        theorem3_slack: None,
        theorem3_ok: None,
        quantitative_r_bound: None,
        quantitative_r_ok: None,
    };
    if p == 2.0 {
        let (branch, bound, slack, r_bound) = theorem3_report(&m, deficit_lower, q.d);
        report.branch = Some(branch);
        report.theorem3_bound = Some(bound);
        report.theorem3_slack = Some(slack);
        report.theorem3_ok = Some(slack >= 0.0 && deficit_lower > 0.0);
        report.quantitative_r_bound = r_bound;
        report.quantitative_r_ok = r_bound.map(|b| deficit_lower >= b);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(v: &[(f64, f64)]) -> ConvexPolygon {
        ConvexPolygon::from_vertices(v).unwrap()
    }

    #[test]
    fn k_values() {
        assert!((k_of_p(2.0).unwrap() - 1.0 / 72.0).abs() < 1e-16);
        assert!((k_of_p(1.5).unwrap() - 0.00625).abs() < 1e-15);
        let direct = 90.0 / (2f64.powf(10.0 / 9.0) * 3.0 * 28.0 * 19.0);
        assert!((k_of_p(10.0).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.0261).abs() < 1e-4);
        assert!(matches!(k_of_p(1.0), Err(Error::BadExponent { .. })));
    }

    #[test]
    fn sigma_from_each_condition() {
        let k = 1.0 / 72.0;
        let s = sigma_constraints();
        // first condition isolated: σ/K = 0.75/π
        assert!((s[0] / k - 0.75 / PI).abs() < 1e-12);
        // second condition: positive root of (π²/96) x² + (π/48) x - 1/162 = 0
        let (a, b, c) = (PI * PI / 96.0, PI / 48.0, -1.0 / 162.0);
        let root = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
        assert!((s[1] / k - root).abs() < 1e-12);
        assert!((root - 0.0834).abs() < 1e-4);
        // third condition binds
        let x3 = 3f64.sqrt() / 2.0 - 8.0 / (3.0 * PI);
        assert!((s[2] / k - x3).abs() < 1e-12);
        assert_eq!(sigma_threshold(), s[2]);
        assert!((sigma_threshold() - 2.386e-4).abs() < 5e-7);
        assert!((k_tilde() - sigma_threshold() / 8.0).abs() < 1e-20);
        assert!(k_tilde() > 0.0 && k_tilde() < 1.0 / 384.0);
    }

    #[test]
    fn rectangle_q_and_d() {
        let sq = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let q = enclosing_rectangle(&sq, &sq.metrics()).unwrap();
        assert!((q.d - 1.0).abs() < 1e-12);
        assert!((q.long_side - 2.0).abs() < 1e-12 && (q.short_side - 1.0).abs() < 1e-12);
        assert!((q.d_geometric - q.d).abs() < 1e-9);

        let (a, b) = (3.0, 0.5);
        let r = poly(&[(0.0, 0.0), (a, 0.0), (a, b), (0.0, b)]);
        let q = enclosing_rectangle(&r, &r.metrics()).unwrap();
        assert!((q.d - b / a).abs() < 1e-12);
        assert!((q.long_side - (a + b)).abs() < 1e-12);

        let h = 3f64.sqrt() / 2.0;
        let tri = poly(&[(0.0, 0.0), (1.0, 0.0), (0.5, h)]);
        let q = enclosing_rectangle(&tri, &tri.metrics()).unwrap();
        assert!((q.d - 2.0).abs() < 1e-12);
        for x in tri.vertices() {
            let local = *x - q.corners[0];
            let (su, sv) = (local.dot(q.short_direction), local.dot(q.short_direction.perp()));
            assert!(su >= -1e-12 && su <= q.short_side + 1e-12);
            assert!(sv >= -1e-12 && sv <= q.long_side + 1e-12);
        }
    }

    #[test]
    fn square_report() {
        let sq = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let r = deficit_report(&sq, 0.035144, 0.0, 2.0).unwrap();
        assert!((r.f_p - 0.5623).abs() < 1e-4);
        assert!((r.deficit - 0.2290).abs() < 1e-3);
        assert!((r.theorem2_bound - 1.0 / 72.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.branch, Some(Branch::LargeDeficit));
        assert!((r.theorem3_bound.unwrap() - sigma_threshold() / 8.0).abs() < 1e-15);
        assert!(r.all_ok());
        assert_eq!(r.quantitative_r_ok, None);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"branch\":\"large-deficit\""));
        assert!(json.contains("\"K_tilde\""));
    }

    #[test]
    fn small_branch_and_failed_verdicts() {
        let sq = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        // T giving F_2 = 1/3 + 1e-5: small branch, and the asymmetry bound fails for D = 1
        let t = (1.0 / 3.0 + 1e-5) / 16.0;
        let r = deficit_report(&sq, t, 0.0, 2.0).unwrap();
        assert_eq!(r.branch, Some(Branch::SmallDeficit));
        assert_eq!(r.theorem3_ok, Some(false));
        assert_eq!(r.quantitative_r_ok, Some(false));
        assert!(!r.all_ok());
        let r3 = deficit_report(&sq, 0.01, 0.0, 3.0).unwrap();
        assert!(r3.branch.is_none() && r3.theorem3_ok.is_none());
    }
}
