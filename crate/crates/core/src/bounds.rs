//! Web-function lower bounds for `T_{f,p}` and the scale-invariant functionals built on it.
//!
//! With `M = μ_f^{(2p-1)/(p-1)}` and `G = 1/(f P^q)`, the integral bound satisfies
//!
//! ```text
//! ∫_0^R μ_f^q / P^{1/(p-1)} dt = -c_p ∫_0^R M' G dt = c_p M(0) G(0) + c_p ∫_0^R M G' dt,
//! ```
//!
//! and `G' ≥ 0`. The discrete bounds below use the same summation-by-parts split, so the
//! ordering `closed ≤ refined ≤ integral` holds exactly on every profile, not just in the
//! limit of fine grids.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::BodyMetrics;
use crate::parallel::{ParallelProfile, WeightProfile};

/// Conjugate exponent `p/(p-1)`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `c_p = (p-1)/(2p-1)`, the sharp constant of the Pólya-type bound.
pub fn c_p(p: f64) -> f64 {
    (p - 1.0) / (2.0 * p - 1.0)
}

/// Upper end of the planar window for `F_p`: `2^{q+1}/((q+2)(q+1))`.
pub fn f_p_upper(p: f64) -> f64 {
    let q = conjugate(p);
    2f64.powf(q + 1.0) / ((q + 2.0) * (q + 1.0))
}

pub fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::BadExponent { p, expected: "1 < p < inf" })
    }
}

/// `c_p μ_f(Ω)^{q+1} / (f(0) P(Ω)^q)`.
pub fn web_lower_closed(metrics: &BodyMetrics, f: &WeightProfile, mu_f_total: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let f0 = f.at_origin();
    if !(f0 > 0.0) {
        return Err(Error::ZeroWeightAtOrigin(f0));
    }
    let q = conjugate(p);
    Ok(c_p(p) * mu_f_total.powf(q + 1.0) / (f0 * metrics.perimeter.powf(q)))
}

/// Per-node quantities shared by the refined and integral bounds.
struct Nodes {
    q: f64,
    cp: f64,
    m_pow: Vec<f64>,
    f: Vec<f64>,
    /// First node where `P`, `f` or `μ_f` vanishes; all sums stop before it.
    end: usize,
}

impl Nodes {
    fn new(profile: &ParallelProfile, p: f64) -> Self {
        let q = conjugate(p);
        let f: Vec<f64> = profile.t.iter().map(|&t| profile.weight.value(t)).collect();
        let n = profile.t.len();
        let end = (0..n)
            .find(|&i| profile.perimeter[i] <= 0.0 || f[i] <= 0.0 || profile.mu_f[i] <= 0.0)
            .unwrap_or(n);
        let m_pow = profile.mu_f.iter().map(|&mu| mu.powf(q + 1.0)).collect();
        Nodes { q, cp: c_p(p), m_pow, f, end }
    }

    fn mean_m(&self, i: usize) -> f64 {
        0.5 * (self.m_pow[i] + self.m_pow[i + 1])
    }
}

/// Integral bound `∫_0^R μ_f^q(t) / P^{1/(p-1)}(t) dt`.
///
/// Each interval before the last positive node contributes `-c_p ΔM · mean(G)`, the exact
/// antiderivative form of the integrand; the final interval, where `P` or `f` may vanish,
/// contributes half a rectangle with the integrand taken as 0 at its right end.
pub fn web_lower_integral(profile: &ParallelProfile, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let nd = Nodes::new(profile, p);
    if nd.end == 0 {
        return Ok(0.0);
    }
    let g = |i: usize| 1.0 / (nd.f[i] * profile.perimeter[i].powf(nd.q));
    let mut sum = 0.0;
    for i in 0..nd.end - 1 {
        sum += -nd.cp * (nd.m_pow[i + 1] - nd.m_pow[i]) * 0.5 * (g(i) + g(i + 1));
    }
    let last = nd.end - 1;
    let dt = profile.t[last + 1] - profile.t[last];
    let integrand = profile.mu_f[last].powf(nd.q) / profile.perimeter[last].powf(nd.q - 1.0);
    Ok(sum + 0.5 * dt * integrand)
}

/// Plain trapezoid rule for the same integral, with the integrand set to 0 wherever `P` vanishes.
pub fn web_lower_integral_trapezoid(profile: &ParallelProfile, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let q = conjugate(p);
    let g: Vec<f64> = (0..profile.t.len())
        .map(|i| {
            let per = profile.perimeter[i];
            if per > 0.0 {
                profile.mu_f[i].powf(q) / per.powf(q - 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok((0..profile.intervals())
        .map(|i| 0.5 * (profile.t[i + 1] - profile.t[i]) * (g[i] + g[i + 1]))
        .sum())
}

/// Refined bound.
///
/// For constant `f` this is the perimeter-decay form
/// `closed + c_p q ∫ (μ_f/P)^{(2p-1)/(p-1)} (-P') / f dt`; otherwise it is the weight-decay form
/// `closed + c_p P(Ω)^{-q} ∫ μ_f^{(2p-1)/(p-1)} (-f')/f² dt`. In both cases `-P'` and `-f'`
/// enter through node differences of `P^{-q}` and `1/f`.
pub fn web_lower_refined(profile: &ParallelProfile, p: f64) -> Result<f64> {
    let closed = web_lower_closed(&profile.metrics, &profile.weight, profile.mu_f_total(), p)?;
    let nd = Nodes::new(profile, p);
    let mut extra = 0.0;
    if nd.end >= 2 {
        if profile.weight.is_constant() {
            let f = nd.f[0];
            for i in 0..nd.end - 1 {
                let dpp = profile.perimeter[i + 1].powf(-nd.q) - profile.perimeter[i].powf(-nd.q);
                extra += nd.mean_m(i) * dpp / f;
            }
        } else {
            let p0q = profile.perimeter[0].powf(nd.q);
            for i in 0..nd.end - 1 {
                extra += nd.mean_m(i) * (1.0 / nd.f[i + 1] - 1.0 / nd.f[i]) / p0q;
            }
        }
    }
    Ok(closed + nd.cp * extra)
}

/// Weight-decay refinement applied to any `f`; for constant `f` it equals the closed bound.
pub fn web_lower_weight_refined(profile: &ParallelProfile, p: f64) -> Result<f64> {
    let closed = web_lower_closed(&profile.metrics, &profile.weight, profile.mu_f_total(), p)?;
    let nd = Nodes::new(profile, p);
    let p0q = profile.perimeter[0].powf(nd.q);
    let extra: f64 = (0..nd.end.saturating_sub(1))
        .map(|i| nd.mean_m(i) * (1.0 / nd.f[i + 1] - 1.0 / nd.f[i]) / p0q)
        .sum();
    Ok(closed + nd.cp * extra)
}

/// `(inf f)^q c_p |Ω|^{q+1} / P(Ω)^q`, with the infimum over `[0, R_Ω]`.
pub fn inf_weight_lower(metrics: &BodyMetrics, f: &WeightProfile, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let q = conjugate(p);
    let inf = f.infimum(metrics.inradius);
    Ok(inf.powf(q) * c_p(p) * metrics.area.powf(q + 1.0) / metrics.perimeter.powf(q))
}

/// `F_p(Ω) = T P^q / |Ω|^{q+1}`.
pub fn functional_f(t: f64, metrics: &BodyMetrics, p: f64) -> f64 {
    let q = conjugate(p);
    t * metrics.perimeter.powf(q) / metrics.area.powf(q + 1.0)
}

/// `H_{1/2}(Ω) = P T^{1/2} / |Ω|^{3/2}` (planar, `p = 2`).
pub fn functional_h_half(t: f64, metrics: &BodyMetrics) -> f64 {
    metrics.perimeter * t.sqrt() / metrics.area.powf(1.5)
}

/// All lower bounds for one profile and exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSet {
    pub p: f64,
    pub q: f64,
    pub c_p: f64,
    pub closed: f64,
    pub refined: f64,
    pub integral: f64,
    pub inf_weight: f64,
    #[serde(rename = "F_p_window")]
    pub f_p_window: [f64; 2],
}

impl BoundSet {
    pub fn compute(profile: &ParallelProfile, p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(BoundSet {
            p,
            q: conjugate(p),
            c_p: c_p(p),
            closed: web_lower_closed(&profile.metrics, &profile.weight, profile.mu_f_total(), p)?,
            refined: web_lower_refined(profile, p)?,
            integral: web_lower_integral(profile, p)?,
            inf_weight: inf_weight_lower(&profile.metrics, &profile.weight, p)?,
            f_p_window: [c_p(p), f_p_upper(p)],
        })
    }

    /// Returns the largest relative violation of `closed ≤ refined ≤ integral` (0 when ordered).
    pub fn chain_defect(&self) -> f64 {
        let a = (self.closed - self.refined) / self.refined.abs().max(f64::MIN_POSITIVE);
        let b = (self.refined - self.integral) / self.integral.abs().max(f64::MIN_POSITIVE);
        a.max(b).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolygon;
    use crate::parallel::profile;
    use std::f64::consts::PI;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::from_vertices(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn constants() {
        assert_eq!(c_p(2.0), 1.0 / 3.0);
        assert_eq!(conjugate(2.0), 2.0);
        assert!((f_p_upper(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!(check_exponent(1.0).is_err());
        assert!(check_exponent(f64::NAN).is_err());
    }

    #[test]
    fn square_bounds_p2() {
        let prof = profile(&unit_square(), WeightProfile::UNIT, 512).unwrap();
        let b = BoundSet::compute(&prof, 2.0).unwrap();
        assert!((b.closed - 1.0 / 48.0).abs() < 1e-14);
        // ∫_0^{1/2} (1-2t)^4 / (4-8t) dt = 1/32
        assert!((b.integral - 1.0 / 32.0).abs() < 1e-6, "{}", b.integral);
        assert!((web_lower_integral_trapezoid(&prof, 2.0).unwrap() - 1.0 / 32.0).abs() < 1e-6);
        assert!(b.closed <= b.refined && b.refined <= b.integral);
        assert_eq!(b.inf_weight, b.closed);
        // For constant f the weight-decay refinement adds nothing.
        assert_eq!(web_lower_weight_refined(&prof, 2.0).unwrap(), b.closed);
    }

    #[test]
    fn square_refined_matches_quadrature() {
        // closed + (1/3)·2·∫_0^{1/2} ((1-2t)^2/(4-8t))^3 · 8 dt = 1/48 + 1/96
        let prof = profile(&unit_square(), WeightProfile::UNIT, 512).unwrap();
        let r = web_lower_refined(&prof, 2.0).unwrap();
        assert!((r - 1.0 / 32.0).abs() < 1e-5, "{r}");
    }

    #[test]
    fn inf_weight_examples() {
        let sq = unit_square();
        let m = sq.metrics();
        let lin = WeightProfile::truncated_linear(1.0, 4.0).unwrap();
        assert_eq!(inf_weight_lower(&m, &lin, 2.0).unwrap(), 0.0);
        let e = WeightProfile::exponential(1.0, 1.0).unwrap();
        let got = inf_weight_lower(&m, &e, 2.0).unwrap();
        assert!((got - (-1.0f64).exp() / 48.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_weight_strictly_refines() {
        let e = WeightProfile::exponential(1.0, 1.0).unwrap();
        let prof = profile(&unit_square(), e, 256).unwrap();
        let b = BoundSet::compute(&prof, 2.0).unwrap();
        assert!(b.refined > b.closed);
        assert!(b.integral >= b.refined);
    }

    #[test]
    fn disk_functionals() {
        let m = BodyMetrics {
            area: PI,
            perimeter: 2.0 * PI,
            diameter: 2.0,
            width: 2.0,
            width_direction: crate::geometry::Point::new(1.0, 0.0),
            inradius: 1.0,
            incenter: crate::geometry::Point::new(0.0, 0.0),
        };
        let t = PI / 8.0;
        assert!((functional_f(t, &m, 2.0) - 0.5).abs() < 1e-15);
        assert!((functional_h_half(t, &m) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn report_json_keys() {
        let prof = profile(&unit_square(), WeightProfile::UNIT, 64).unwrap();
        let v = serde_json::to_value(BoundSet::compute(&prof, 2.0).unwrap()).unwrap();
        for k in ["p", "q", "c_p", "closed", "refined", "integral", "inf_weight", "F_p_window"] {
            assert!(v.get(k).is_some(), "missing {k}");
        }
    }
}
