//! Inner parallel bodies `Ω_t = {x : d(x, ∂Ω) > t}` and their perimeter and area profiles.

mod weight;

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BodyMetrics, ConvexPolygon, Point};

pub use weight::WeightProfile;

/// Smallest accepted number of grid intervals.
pub const MIN_GRID: usize = 64;
pub const DEFAULT_GRID: usize = 512;

/// Result of eroding a polygon by `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerBody {
    Body(ConvexPolygon),
    Empty,
}

impl InnerBody {
    pub fn perimeter(&self) -> f64 {
        match self {
            InnerBody::Body(p) => p.perimeter(),
            InnerBody::Empty => 0.0,
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            InnerBody::Body(p) => p.area(),
            InnerBody::Empty => 0.0,
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            InnerBody::Body(p) => p.len(),
            InnerBody::Empty => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, InnerBody::Empty)
    }
}

/// Directed line `base + s·dir` with the kept half-plane on its left.
#[derive(Clone, Copy)]
struct Ray {
    base: Point,
    dir: Point,
}

impl Ray {
    #[inline]
    fn side(&self, x: Point) -> f64 {
        self.dir.cross(x - self.base)
    }

    fn intersect(&self, other: &Ray) -> Option<Point> {
        let den = self.dir.cross(other.dir);
        if den.abs() < 1e-15 {
            return None;
        }
        let s = other.dir.cross(self.base - other.base) / den;
        Some(self.base + self.dir * s)
    }
}

/// Half-plane intersection of the edge lines of `poly`, each moved inward by `t`.
///
/// The edges of a counter-clockwise convex polygon are already sorted by angle
/// (cyclically), so the usual deque sweep runs in linear time.
fn erode(poly: &ConvexPolygon, t: f64) -> InnerBody {
    let v = poly.vertices();
    let n = v.len();
    if t == 0.0 {
        return InnerBody::Body(poly.clone());
    }
    let mut rays: Vec<(f64, Ray)> = (0..n)
        .map(|i| {
            let d = v[(i + 1) % n] - v[i];
            let dir = d * (1.0 / d.norm());
            (dir.y.atan2(dir.x), Ray { base: v[i] + dir.perp() * t, dir })
        })
        .collect();
    rays.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rays: Vec<Ray> = rays.into_iter().map(|(_, r)| r).collect();

    let scale = poly.perimeter();
    let eps = 1e-14 * scale;
    let outside = |r: &Ray, x: Option<Point>| x.map_or(true, |x| r.side(x) <= eps);

    let mut dq: std::collections::VecDeque<Ray> = std::collections::VecDeque::with_capacity(n);
    for r in &rays {
        while dq.len() >= 2 && outside(r, dq[dq.len() - 1].intersect(&dq[dq.len() - 2])) {
            dq.pop_back();
        }
        while dq.len() >= 2 && outside(r, dq[0].intersect(&dq[1])) {
            dq.pop_front();
        }
        dq.push_back(*r);
    }
    while dq.len() >= 3 && outside(&dq[0], dq[dq.len() - 1].intersect(&dq[dq.len() - 2])) {
        dq.pop_back();
    }
    while dq.len() >= 3 && outside(&dq[dq.len() - 1], dq[0].intersect(&dq[1])) {
        dq.pop_front();
    }
    if dq.len() < 3 {
        return InnerBody::Empty;
    }
    let k = dq.len();
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        match dq[i].intersect(&dq[(i + 1) % k]) {
            Some(p) => out.push(p),
            None => return InnerBody::Empty,
        }
    }
    // Every surviving vertex must satisfy all constraints; otherwise the set is empty.
    if rays.iter().any(|r| out.iter().any(|&p| r.side(p) < -1e-9 * scale)) {
        return InnerBody::Empty;
    }
    match ConvexPolygon::from_ccw_trusted(out) {
        Some(p) => InnerBody::Body(p),
        None => InnerBody::Empty,
    }
}

/// Inner parallel body `Ω_t`; `Empty` once `t` reaches the inradius.
pub fn inner_body(poly: &ConvexPolygon, t: f64) -> Result<InnerBody> {
    if !(t >= 0.0) {
        return Err(Error::BadParameter(format!("erosion depth must be >= 0, got {t}")));
    }
    let r = poly.metrics().inradius;
    if t >= r {
        return Ok(InnerBody::Empty);
    }
    Ok(erode(poly, t))
}

/// Sampled curves `t ↦ P(t), μ(t), μ_f(t)` on a uniform grid over `[0, R_Ω]`.
#[derive(Debug, Clone, Serialize)]
pub struct ParallelProfile {
    pub t: Vec<f64>,
    pub perimeter: Vec<f64>,
    /// `μ(t) = |Ω_t|`.
    pub area: Vec<f64>,
    /// `μ_f(t) = ∫_{Ω_t} f(d(x, ∂Ω)) dx`.
    pub mu_f: Vec<f64>,
    /// Vertex count of `Ω_{t_i}`; a change between neighbours marks an edge-vanishing event.
    pub vertex_counts: Vec<usize>,
    /// `lim_{t → R⁻} P(t)`; positive when `Ω_t` shrinks to a segment.
    pub perimeter_left_limit: f64,
    pub metrics: BodyMetrics,
    pub weight: WeightProfile,
}

impl ParallelProfile {
    /// Number of grid intervals `m`.
    pub fn intervals(&self) -> usize {
        self.t.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.t[1] - self.t[0]
    }

    pub fn inradius(&self) -> f64 {
        self.metrics.inradius
    }

    /// `μ_f(Ω)`.
    pub fn mu_f_total(&self) -> f64 {
        self.mu_f[0]
    }

    /// Perimeter just left of node `i`, which differs from the stored value only at `t = R`.
    pub fn perimeter_left(&self, i: usize) -> f64 {
        if i + 1 == self.t.len() {
            self.perimeter_left_limit
        } else {
            self.perimeter[i]
        }
    }

    /// Whether `[t_i, t_{i+1}]` contains no edge-vanishing event (and is not the last interval).
    pub fn event_free(&self, i: usize) -> bool {
        i + 2 < self.t.len() && self.vertex_counts[i] == self.vertex_counts[i + 1]
    }

    /// Largest relative gap between `-Δμ/Δt` and the mean of the endpoint perimeters over
    /// event-free intervals.
    pub fn area_derivative_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.intervals() {
            if !self.event_free(i) {
                continue;
            }
            let dt = self.t[i + 1] - self.t[i];
            let fd = -(self.area[i + 1] - self.area[i]) / dt;
            let mean = 0.5 * (self.perimeter[i] + self.perimeter[i + 1]);
            worst = worst.max((fd - mean).abs() / mean.max(f64::MIN_POSITIVE));
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,P,mu,mu_f")?;
        for i in 0..self.t.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t[i], self.perimeter[i], self.area[i], self.mu_f[i]
            )?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Cubic Hermite interpolation of `μ` on `[a, b]` using `μ' = -P`.
#[inline]
fn hermite_mu(a: f64, b: f64, mu_a: f64, mu_b: f64, p_a: f64, p_b: f64, s: f64) -> f64 {
    let h = b - a;
    let x = (s - a) / h;
    let h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
    let h10 = x * (1.0 - x) * (1.0 - x);
    let h01 = x * x * (3.0 - 2.0 * x);
    let h11 = x * x * (x - 1.0);
    h00 * mu_a + h10 * h * (-p_a) + h01 * mu_b + h11 * h * (-p_b)
}

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// Builds the profile of `poly` for weight `f` on `m` uniform intervals.
///
/// `P` and `μ` are exact at every node. `μ_f` uses `μ_f(t) = f(t)μ(t) + ∫_t^R f'(s)μ(s) ds`,
/// with the integral taken by Gauss rules on a Hermite interpolant of `μ`, split at the
/// kinks of `f`. This is exact for constant `f` and insensitive to the perimeter jump at
/// `t = R` that bodies with a segment core show.
pub fn profile(poly: &ConvexPolygon, f: WeightProfile, m: usize) -> Result<ParallelProfile> {
    if m < MIN_GRID {
        return Err(Error::GridTooCoarse(m));
    }
    let metrics = poly.metrics();
    let r = metrics.inradius;
    let t: Vec<f64> = (0..=m).map(|i| if i == m { r } else { r * i as f64 / m as f64 }).collect();
    let mut perimeter = vec![0.0; m + 1];
    let mut area = vec![0.0; m + 1];
    let mut vertex_counts = vec![0; m + 1];
    for i in 0..m {
        let body = if i == 0 { InnerBody::Body(poly.clone()) } else { erode(poly, t[i]) };
        perimeter[i] = body.perimeter();
        area[i] = body.area();
        vertex_counts[i] = body.vertex_count();
    }
    // Linear extrapolation of the perimeter to t = R from the left.
    let perimeter_left_limit = (2.0 * perimeter[m - 1] - perimeter[m - 2]).max(0.0);

    let p_left = |i: usize| if i == m { perimeter_left_limit } else { perimeter[i] };
    let mut mu_f = vec![0.0; m + 1];
    let mut tail = 0.0;
    let kinks = f.kinks();
    for i in (0..m).rev() {
        let (a, b) = (t[i], t[i + 1]);
        let mut cuts = vec![a];
        cuts.extend(kinks.iter().copied().filter(|&k| k > a && k < b));
        cuts.push(b);
        let mut piece = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, wt) in GAUSS3 {
                let s = mid + half * x;
                let mu = hermite_mu(a, b, area[i], area[i + 1], perimeter[i], p_left(i + 1), s);
                piece += wt * half * f.derivative(s) * mu;
            }
        }
        tail += piece;
        mu_f[i] = (f.value(t[i]) * area[i] + tail).max(0.0);
    }

    Ok(ParallelProfile {
        t,
        perimeter,
        area,
        mu_f,
        vertex_counts,
        perimeter_left_limit,
        metrics,
        weight: f,
    })
}

/// Worst slacks of the inner Steiner inequalities over a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinerReport {
    /// `min_i (P(Ω) - 2πt_i) - P(t_i)`.
    pub perimeter_slack: f64,
    pub perimeter_node: usize,
    /// `min_i μ(t_i) - (|Ω| - P(Ω)t_i + πt_i²)`.
    pub area_slack: f64,
    pub area_node: usize,
    /// `min_i -ΔP/Δt - 2π` over the grid intervals.
    pub slope_slack: f64,
    pub slope_interval: usize,
}

/// Slacks without any tolerance applied.
pub fn steiner_slacks(profile: &ParallelProfile) -> SteinerReport {
    let p0 = profile.perimeter[0];
    let a0 = profile.area[0];
    let mut rep = SteinerReport {
        perimeter_slack: f64::INFINITY,
        perimeter_node: 0,
        area_slack: f64::INFINITY,
        area_node: 0,
        slope_slack: f64::INFINITY,
        slope_interval: 0,
    };
    for (i, &t) in profile.t.iter().enumerate() {
        let s1 = (p0 - 2.0 * PI * t) - profile.perimeter_left(i);
        if s1 < rep.perimeter_slack {
            rep.perimeter_slack = s1;
            rep.perimeter_node = i;
        }
        let s2 = profile.area[i] - (a0 - p0 * t + PI * t * t);
        if s2 < rep.area_slack {
            rep.area_slack = s2;
            rep.area_node = i;
        }
    }
    for i in 0..profile.intervals() {
        let dt = profile.t[i + 1] - profile.t[i];
        let s = -(profile.perimeter_left(i + 1) - profile.perimeter[i]) / dt - 2.0 * PI;
        if s < rep.slope_slack {
            rep.slope_slack = s;
            rep.slope_interval = i;
        }
    }
    rep
}

/// Checks `P(t) ≤ P(Ω) - 2πt`, `μ(t) ≥ |Ω| - P(Ω)t + πt²` and `-P' ≥ 2π` at every node,
/// each with a relative tolerance of `1e-9`.
pub fn steiner_check(profile: &ParallelProfile) -> Result<SteinerReport> {
    let rep = steiner_slacks(profile);
    let p0 = profile.perimeter[0];
    let a0 = profile.area[0];
    let tol = 1e-9;
    if rep.perimeter_slack < -tol * p0 {
        return Err(Error::ViolationFound {
            inequality: "steiner perimeter".into(),
            location: format!("t = {}", profile.t[rep.perimeter_node]),
            slack: rep.perimeter_slack,
        });
    }
    if rep.area_slack < -tol * a0 {
        return Err(Error::ViolationFound {
            inequality: "steiner area".into(),
            location: format!("t = {}", profile.t[rep.area_node]),
            slack: rep.area_slack,
        });
    }
    if rep.slope_slack < -tol * p0 / profile.step() {
        return Err(Error::ViolationFound {
            inequality: "perimeter decay".into(),
            location: format!("interval {}", rep.slope_interval),
            slack: rep.slope_slack,
        });
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::from_vertices(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    fn equilateral() -> ConvexPolygon {
        ConvexPolygon::from_vertices(&[(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)]).unwrap()
    }

    #[test]
    fn square_erosion() {
        let sq = unit_square();
        let b = inner_body(&sq, 0.25).unwrap();
        assert!((b.perimeter() - 2.0).abs() < 1e-14);
        assert!((b.area() - 0.25).abs() < 1e-14);
        assert_eq!(b.vertex_count(), 4);
        assert!(inner_body(&sq, 0.5).unwrap().is_empty());
        assert!(inner_body(&sq, 0.7).unwrap().is_empty());
        assert!(inner_body(&sq, -0.1).is_err());
    }

    #[test]
    fn triangle_erodes_to_similar_triangle() {
        let tri = equilateral();
        let r = 3f64.sqrt() / 6.0;
        for k in 1..10 {
            let t = r * k as f64 / 10.0;
            let b = inner_body(&tri, t).unwrap();
            assert_eq!(b.vertex_count(), 3);
            assert!((b.perimeter() - 3.0 * (1.0 - t / r)).abs() < 1e-13);
        }
    }

    #[test]
    fn erosion_drops_short_edges() {
        // Cutting a small corner off the square: the short edge vanishes at a finite depth.
        let p = ConvexPolygon::from_vertices(&[(0.0, 0.0), (1.0, 0.0), (1.0, 0.9), (0.9, 1.0), (0.0, 1.0)]).unwrap();
        let b = inner_body(&p, 0.2).unwrap();
        assert_eq!(b.vertex_count(), 4);
        assert!((b.perimeter() - 4.0 * 0.6).abs() < 1e-13);
    }

    #[test]
    fn square_profile_closed_forms() {
        let prof = profile(&unit_square(), WeightProfile::UNIT, 512).unwrap();
        for i in 0..=512 {
            let t = prof.t[i];
            assert!((prof.perimeter_left(i) - (4.0 - 8.0 * t)).abs() < 1e-12);
            assert!((prof.area[i] - (1.0 - 2.0 * t).powi(2)).abs() < 1e-12);
        }
        assert!((prof.mu_f_total() - 1.0).abs() < 1e-12);
        assert_eq!(prof.mu_f[512], 0.0);
        assert!(prof.area_derivative_defect() < 1e-9);
    }

    #[test]
    fn linear_weight_on_square() {
        // ∫_0^{1/2} (1 - s)(4 - 8s) ds = 5/6
        let f = WeightProfile::truncated_linear(1.0, 1.0).unwrap();
        let prof = profile(&unit_square(), f, 512).unwrap();
        assert!((prof.mu_f_total() - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_weight_kink_inside_grid() {
        // f(s) = max(1 - 4s, 0) vanishes at s = 1/4: ∫_0^{1/4} (1 - 4s)(4 - 8s) ds = 5/12
        let f = WeightProfile::truncated_linear(1.0, 4.0).unwrap();
        let prof = profile(&unit_square(), f, 100).unwrap();
        assert!((prof.mu_f_total() - 5.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_rejected() {
        assert_eq!(profile(&unit_square(), WeightProfile::UNIT, 10).unwrap_err(), Error::GridTooCoarse(10));
    }

    #[test]
    fn square_steiner_slacks() {
        let prof = profile(&unit_square(), WeightProfile::UNIT, 512).unwrap();
        let rep = steiner_check(&prof).unwrap();
        assert!(rep.perimeter_slack.abs() < 1e-12);
        assert_eq!(rep.perimeter_node, 0);
        assert!((rep.slope_slack - (8.0 - 2.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn rectangle_keeps_segment_core_perimeter() {
        let rect = ConvexPolygon::from_vertices(&[(0.0, 0.0), (4.0, 0.0), (4.0, 1.0), (0.0, 1.0)]).unwrap();
        let prof = profile(&rect, WeightProfile::UNIT, 256).unwrap();
        assert!((prof.perimeter_left_limit - 6.0).abs() < 1e-12);
        assert!((prof.mu_f_total() - 4.0).abs() < 1e-12);
        steiner_check(&prof).unwrap();
    }

    #[test]
    fn csv_layout() {
        let prof = profile(&unit_square(), WeightProfile::UNIT, 64).unwrap();
        let csv = prof.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,P,mu,mu_f"));
        assert_eq!(lines.count(), 65);
    }
}
