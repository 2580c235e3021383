//! Shape families with closed-form reference data: thinning rectangles and isosceles
//! triangles, stadii and disks (as fine polygons), and the thinning-cylinder formulas.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::{c_p, check_exponent, conjugate};
use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point};
use crate::parallel::WeightProfile;

pub const DEFAULT_ARC_POINTS: usize = 256;
pub const MIN_ARC_POINTS: usize = 64;

fn default_k() -> usize {
    DEFAULT_ARC_POINTS
}

/// A named shape with its parameters. Serialized as a shape descriptor, e.g.
/// `{"shape":"stadium","r":0.5,"a":2,"k":256}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum ShapeKind {
    /// `(-1/(2l), 1/(2l)) × (-l/2, l/2)`.
    Rectangle { l: f64 },
    /// Isosceles, base `2/l`, height `l`.
    Triangle { l: f64 },
    Stadium {
        r: f64,
        a: f64,
        #[serde(default = "default_k")]
        k: usize,
    },
    Disk {
        #[serde(rename = "R")]
        r: f64,
        #[serde(default = "default_k")]
        k: usize,
    },
}

/// Metrics of the exact (possibly curved) body the polygon approximates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticRecord {
    pub area: f64,
    pub perimeter: f64,
    pub inradius: f64,
    pub width: f64,
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct Shape {
    /// `None` for bodies given by raw vertices.
    pub kind: Option<ShapeKind>,
    pub polygon: ConvexPolygon,
    pub record: AnalyticRecord,
}

impl Shape {
    pub fn build(kind: ShapeKind) -> Result<Shape> {
        match kind {
            ShapeKind::Rectangle { l } => rectangle(l),
            ShapeKind::Triangle { l } => isosceles_triangle(l),
            ShapeKind::Stadium { r, a, k } => stadium(r, a, k),
            ShapeKind::Disk { r, k } => disk(r, k),
        }
    }

    pub fn from_polygon(polygon: ConvexPolygon) -> Shape {
        let m = polygon.metrics();
        let record = AnalyticRecord {
            area: m.area,
            perimeter: m.perimeter,
            inradius: m.inradius,
            width: m.width,
            diameter: m.diameter,
        };
        Shape { kind: None, polygon, record }
    }

    /// Exact `T_{f,p}` of the underlying body where one is known: disks for constant `f`
    /// and every `p`, rectangles for constant `f` and `p = 2`.
    pub fn reference_torsion(&self, f: &WeightProfile, p: f64) -> Option<f64> {
        let WeightProfile::Constant { c } = *f else { return None };
        let q = conjugate(p);
        match self.kind? {
            ShapeKind::Disk { r, .. } => Some(c.powf(q) * disk_torsion(r, p).ok()?),
            ShapeKind::Rectangle { l } if p == 2.0 => Some(c * c * rectangle_torsion(1.0 / l, l)),
            _ => None,
        }
    }

    /// `T_p` upper bound by the one-dimensional slab profile, for rectangles; the weight
    /// enters through `f(0)^q`.
    pub fn slab_upper(&self, f: &WeightProfile, p: f64) -> Option<f64> {
        match self.kind? {
            ShapeKind::Rectangle { l } => Some(f.at_origin().powf(conjugate(p)) * slab_upper_bound(l, p, 2)),
            _ => None,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Descriptor {
    Vertices { vertices: Vec<[f64; 2]> },
    Named(ShapeKind),
}

/// Parses a shape descriptor: `{"vertices": [[x, y], ...]}` or a [`ShapeKind`] object.
pub fn from_descriptor(json: &str) -> Result<Shape> {
    let d: Descriptor = serde_json::from_str(json)
        .map_err(|e| Error::Descriptor(format!("expected {{\"vertices\": ...}} or {{\"shape\": ...}}: {e}")))?;
    match d {
        Descriptor::Vertices { vertices } => {
            let pts: Vec<Point> = vertices.iter().map(|&[x, y]| Point::new(x, y)).collect();
            Ok(Shape::from_polygon(ConvexPolygon::from_vertices(&pts)?))
        }
        Descriptor::Named(kind) => Shape::build(kind),
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Unit-area rectangle of width `l`, `0 < l < 1`.
pub fn rectangle(l: f64) -> Result<Shape> {
    if !(l > 0.0 && l < 1.0) {
        return Err(Error::BadParameter(format!("rectangle needs 0 < l < 1, got {l}")));
    }
    let (a, b) = (0.5 / l, 0.5 * l);
    let polygon = ConvexPolygon::from_vertices(&[(-a, -b), (a, -b), (a, b), (-a, b)])?;
    let record = AnalyticRecord {
        area: 1.0,
        perimeter: 2.0 / l * (1.0 + l * l),
        inradius: l / 2.0,
        width: l,
        diameter: (1.0 / (l * l) + l * l).sqrt(),
    };
    Ok(Shape { kind: Some(ShapeKind::Rectangle { l }), polygon, record })
}

/// `2 c_p l^{-1} (l/2)^{(2p-1)/(p-1)}`: the integral of the slab solution over the thinning
/// cylinder of width `l` and unit volume. The value does not depend on `n`.
pub fn slab_upper_bound(l: f64, p: f64, n: usize) -> f64 {
    debug_assert!(n >= 2);
    2.0 * c_p(p) / l * (l / 2.0).powf((2.0 * p - 1.0) / (p - 1.0))
}

/// `P = 2/l + l^{1/(n-1)} H^{n-2}(∂C)` for the cylinder `l^{-1/(n-1)} C × [-l/2, l/2]`
/// with `|C| = 1`. In the plane the boundary measure of `C` is 2.
pub fn cylinder_perimeter(l: f64, n: usize, boundary_measure: f64) -> f64 {
    2.0 / l + l.powf(1.0 / (n as f64 - 1.0)) * boundary_measure
}

/// `T_2` of an `a × b` rectangle with unit load, by the single Fourier series
/// `(a b³/12)(1 - (192 b)/(π⁵ a) Σ_{n odd} tanh(nπa/(2b))/n⁵)` for `b ≤ a`.
pub fn rectangle_torsion(a: f64, b: f64) -> f64 {
    let (a, b) = if b <= a { (a, b) } else { (b, a) };
    let mut s = 0.0;
    let mut n = 1.0f64;
    loop {
        let term = (n * PI * a / (2.0 * b)).tanh() / n.powi(5);
        s += term;
        if term < 1e-18 {
            break;
        }
        n += 2.0;
    }
    a * b.powi(3) / 12.0 * (1.0 - 192.0 * b / (PI.powi(5) * a) * s)
}

/// Isosceles triangle with base `2/l` and height `l`, unit area.
pub fn isosceles_triangle(l: f64) -> Result<Shape> {
    check_positive("l", l)?;
    let half = 1.0 / l;
    let polygon = ConvexPolygon::from_vertices(&[(-half, 0.0), (half, 0.0), (0.0, l)])?;
    let side = (half * half + l * l).sqrt();
    let perimeter = 2.0 * half + 2.0 * side;
    let record = AnalyticRecord {
        area: 1.0,
        perimeter,
        inradius: 2.0 / perimeter,
        width: l.min(2.0 / side),
        diameter: (2.0 * half).max(side),
    };
    Ok(Shape { kind: Some(ShapeKind::Triangle { l }), polygon, record })
}

/// Lower bound on `F_2 - 1/3` for every triangle: `(1/6)(P R/|Ω| - 1)³` with `P R = 2|Ω|`.
pub const TRIANGLE_DEFICIT_FLOOR: f64 = 1.0 / 6.0;

/// Convex hull of two radius-`r` disks with centers `a` apart, with `k` points on each cap.
pub fn stadium(r: f64, a: f64, k: usize) -> Result<Shape> {
    check_positive("r", r)?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::BadParameter(format!("stadium needs a >= 0, got {a}")));
    }
    if k < MIN_ARC_POINTS {
        return Err(Error::BadParameter(format!("need at least {MIN_ARC_POINTS} arc points, got {k}")));
    }
    let record = AnalyticRecord {
        area: PI * r * r + 2.0 * r * a,
        perimeter: 2.0 * PI * r + 2.0 * a,
        inradius: r,
        width: 2.0 * r,
        diameter: a + 2.0 * r,
    };
    let polygon = if a == 0.0 {
        regular_polygon(r, 2 * (k - 1))?
    } else {
        let mut pts = Vec::with_capacity(2 * k);
        for side in [1.0, -1.0] {
            for j in 0..k {
                let th = -PI / 2.0 + PI * j as f64 / (k - 1) as f64;
                pts.push(Point::new(side * (0.5 * a + r * th.cos()), side * r * th.sin()));
            }
        }
        ConvexPolygon::from_vertices(&pts)?
    };
    Ok(Shape { kind: Some(ShapeKind::Stadium { r, a, k }), polygon, record })
}

/// Unit-area stadium of width `l`.
pub fn thin_stadium(l: f64, k: usize) -> Result<Shape> {
    check_positive("l", l)?;
    let r = l / 2.0;
    let a = (1.0 - PI * r * r) / (2.0 * r);
    if a < 0.0 {
        return Err(Error::BadParameter(format!("no unit-area stadium of width {l}")));
    }
    stadium(r, a, k)
}

fn regular_polygon(r: f64, k: usize) -> Result<ConvexPolygon> {
    let pts: Vec<Point> = (0..k)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / k as f64;
            Point::new(r * th.cos(), r * th.sin())
        })
        .collect();
    ConvexPolygon::from_vertices(&pts)
}

/// Regular `k`-gon inscribed in the disk of radius `r` centered at the origin.
pub fn disk(r: f64, k: usize) -> Result<Shape> {
    check_positive("R", r)?;
    if k < MIN_ARC_POINTS {
        return Err(Error::BadParameter(format!("need at least {MIN_ARC_POINTS} vertices, got {k}")));
    }
    let record = AnalyticRecord {
        area: PI * r * r,
        perimeter: 2.0 * PI * r,
        inradius: r,
        width: 2.0 * r,
        diameter: 2.0 * r,
    };
    Ok(Shape { kind: Some(ShapeKind::Disk { r, k }), polygon: regular_polygon(r, k)?, record })
}

/// `T_p` of the disk of radius `r` with unit load, from the radial solution
/// `u = 2^{1-q} (r^q - |x|^q)/q`.
pub fn disk_torsion(r: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let q = conjugate(p);
    Ok(2.0 * PI / q * 2f64.powf(1.0 - q) * r.powf(q + 2.0) * (0.5 - 1.0 / (q + 2.0)))
}
