use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::Point;
use crate::error::{Error, Result};

/// Minimum separation between consecutive vertices.
pub const VERTEX_SEPARATION: f64 = 1e-12;
/// Normalized cross products below this magnitude are treated as collinear turns.
pub const COLLINEAR_TOLERANCE: f64 = 1e-12;
/// Polygons with area below this are rejected as degenerate.
pub const MIN_AREA: f64 = 1e-9;

/// Supporting line of one polygon edge, `normal · x = offset`, with the outward unit normal.
///
/// The polygon is the intersection of the half-planes `normal · x <= offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLine {
    pub normal: Point,
    pub offset: f64,
}

impl EdgeLine {
    /// Signed distance from `x` to the line, positive inside the polygon.
    #[inline]
    pub fn inner_distance(&self, x: Point) -> f64 {
        self.offset - self.normal.dot(x)
    }
}

/// A bounded open convex planar body given by its counter-clockwise vertex list.
///
/// Every consecutive turn is strictly positive, consecutive vertices are at least
/// [`VERTEX_SEPARATION`] apart and the enclosed area exceeds [`MIN_AREA`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Builds a polygon from an ordered vertex list of either orientation.
    ///
    /// Duplicate and collinear vertices are merged. A reflex turn, a spike, or a
    /// boundary that winds more than once is reported as [`Error::NonConvex`].
    pub fn from_vertices<P: Into<Point> + Copy>(points: &[P]) -> Result<Self> {
        let mut pts: Vec<Point> = points.iter().map(|&p| p.into()).collect();
        if pts.len() < 3 {
            return Err(Error::Degenerate(format!("{} vertices, need at least 3", pts.len())));
        }
        if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Degenerate("non-finite coordinate".into()));
        }
        dedup_cyclic(&mut pts, VERTEX_SEPARATION);
        if pts.len() < 3 {
            return Err(Error::Degenerate("fewer than 3 distinct vertices".into()));
        }
        let signed = signed_area(&pts);
        if signed.abs() < MIN_AREA {
            return Err(Error::Degenerate(format!("area {:e} below {:e}", signed.abs(), MIN_AREA)));
        }
        if signed < 0.0 {
            pts.reverse();
        }

        // Remove collinear vertices until every remaining turn is strictly positive.
        loop {
            let n = pts.len();
            if n < 3 {
                return Err(Error::Degenerate("collinear vertex set".into()));
            }
            let mut removed = None;
            for i in 0..n {
                let a = pts[(i + n - 1) % n];
                let b = pts[i];
                let c = pts[(i + 1) % n];
                let (u, v) = (b - a, c - b);
                let turn = u.cross(v) / (u.norm() * v.norm());
                if turn.abs() <= COLLINEAR_TOLERANCE {
                    if u.dot(v) < 0.0 {
                        return Err(Error::NonConvex { vertex: i });
                    }
                    removed = Some(i);
                    break;
                }
                if turn < 0.0 {
                    return Err(Error::NonConvex { vertex: i });
                }
            }
            match removed {
                Some(i) => {
                    pts.remove(i);
                }
                None => break,
            }
        }

        // A star polygon has only left turns but winds twice.
        let n = pts.len();
        let turning: f64 = (0..n)
            .map(|i| {
                let u = pts[(i + 1) % n] - pts[i];
                let v = pts[(i + 2) % n] - pts[(i + 1) % n];
                u.cross(v).atan2(u.dot(v))
            })
            .sum();
        if (turning - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::NonConvex { vertex: 0 });
        }
        let area = signed_area(&pts);
        if area < MIN_AREA {
            return Err(Error::Degenerate(format!("area {:e} below {:e}", area, MIN_AREA)));
        }
        Ok(ConvexPolygon { vertices: pts })
    }

    /// Wraps vertices known to be counter-clockwise and convex, e.g. an exact half-plane
    /// intersection. Only near-coincident vertices are merged; `None` if fewer than
    /// three remain or the area vanishes.
    pub(crate) fn from_ccw_trusted(mut pts: Vec<Point>) -> Option<Self> {
        let scale = pts.iter().fold(0.0f64, |m, p| m.max(p.x.abs()).max(p.y.abs())).max(1e-300);
        dedup_cyclic(&mut pts, 1e-14 * scale);
        if pts.len() < 3 || signed_area(&pts) <= 0.0 {
            return None;
        }
        Some(ConvexPolygon { vertices: pts })
    }

    /// Convex hull of a point cloud (monotone chain), collinear points dropped.
    pub fn convex_hull(points: &[Point]) -> Result<Self> {
        let mut pts: Vec<Point> = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::Degenerate("fewer than 3 distinct points".into()));
        }
        let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
                Box::new(pts.iter())
            } else {
                Box::new(pts.iter().rev())
            };
            for &p in iter {
                while hull.len() >= start + 2 {
                    let a = hull[hull.len() - 2];
                    let b = hull[hull.len() - 1];
                    if (b - a).cross(p - b) <= 0.0 {
                        hull.pop();
                    } else {
                        break;
                    }
                }
                hull.push(p);
            }
            hull.pop();
        }
        ConvexPolygon::from_vertices(&hull)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    pub fn edge_lines(&self) -> Vec<EdgeLine> {
        self.edges()
            .map(|(a, b)| {
                let e = b - a;
                let len = e.norm();
                let normal = Point::new(e.y / len, -e.x / len);
                EdgeLine { normal, offset: normal.dot(a) }
            })
            .collect()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    /// Distance to the boundary for an interior point, `min` over edge lines.
    /// Negative outside.
    pub fn boundary_distance(&self, x: Point) -> f64 {
        self.edge_lines()
            .iter()
            .map(|l| l.inner_distance(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// `h(y) = max_x x·y` over the vertices. Homogeneous of degree one in `y`.
    pub fn support_function(&self, direction: Point) -> Result<f64> {
        if direction.norm() == 0.0 || !direction.norm().is_finite() {
            return Err(Error::ZeroDirection);
        }
        Ok(self
            .vertices
            .iter()
            .map(|v| v.dot(direction))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Width `h(y) + h(-y)` in a direction.
    pub fn width_in_direction(&self, direction: Point) -> Result<f64> {
        Ok(self.support_function(direction)? + self.support_function(-direction)?)
    }

    /// Dilation about the origin.
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::NonPositiveScale(t));
        }
        Ok(ConvexPolygon {
            vertices: self.vertices.iter().map(|&v| v * t).collect(),
        })
    }

    pub fn translate(&self, shift: Point) -> Self {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|&v| v + shift).collect(),
        }
    }

    /// Rotation about the origin by `angle` radians.
    pub fn rotate(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        ConvexPolygon {
            vertices: self
                .vertices
                .iter()
                .map(|v| Point::new(c * v.x - s * v.y, s * v.x + c * v.y))
                .collect(),
        }
    }

    /// Smallest interior angle, in radians.
    pub fn min_interior_angle(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[(i + n - 1) % n] - self.vertices[i];
                let b = self.vertices[(i + 1) % n] - self.vertices[i];
                a.cross(b).abs().atan2(a.dot(b))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `x` lies in the closed polygon up to `tol`.
    pub fn contains(&self, x: Point, tol: f64) -> bool {
        self.boundary_distance(x) >= -tol
    }
}

/// Shoelace formula; positive for counter-clockwise order.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>()
}

fn dedup_cyclic(pts: &mut Vec<Point>, tol: f64) {
    pts.dedup_by(|b, a| a.distance(*b) < tol);
    while pts.len() > 1 && pts[0].distance(pts[pts.len() - 1]) < tol {
        pts.pop();
    }
}

/// On-disk shape description: explicit vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexList {
    pub vertices: Vec<Point>,
}
