use std::collections::HashMap;

use serde::Serialize;
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{ConvexPolygon, Point};

/// Upper limit on mesh nodes.
pub const MAX_NODES: usize = 2_000_000;

/// Minimum angle requested from the Delaunay refinement, in degrees.
const ANGLE_LIMIT_DEG: f64 = 25.0;

/// Conforming triangle mesh of a convex polygon.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    /// Counter-clockwise index triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// Target edge length the mesh was built for.
    pub h: f64,
    pub domain: ConvexPolygon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshStats {
    pub nodes: usize,
    pub triangles: usize,
    pub boundary_nodes: usize,
    pub max_edge: f64,
    /// Smallest interior angle over all triangles, degrees.
    pub min_angle_deg: f64,
    pub total_area: f64,
}

fn tri_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// Delaunay mesh of `poly` with edges of length about `h` or less.
///
/// The boundary is sampled at spacing at most `h` and inserted as constraint edges; the
/// interior is filled by Delaunay refinement with a 25° angle bound and an area cap of an
/// equilateral triangle of side `h`. Angles of the input polygon below that bound are kept
/// as they are.
pub fn triangulate(poly: &ConvexPolygon, h: f64) -> Result<Mesh> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::BadParameter(format!("mesh size must be positive, got {h}")));
    }
    let tri_cap = 3f64.sqrt() / 4.0 * h * h;
    let estimate = (poly.area() / tri_cap * 0.6 + poly.perimeter() / h * 2.0) as usize + 3;
    if estimate > MAX_NODES {
        return Err(Error::TooFine(estimate));
    }

    let mut ring = Vec::new();
    for (a, b) in poly.edges() {
        let segs = ((b - a).norm() / h).ceil().max(1.0) as usize;
        for k in 0..segs {
            let s = k as f64 / segs as f64;
            let p = a + (b - a) * s;
            ring.push(Point2::new(p.x, p.y));
        }
    }
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    cdt.add_constraint_edges(ring, true)
        .map_err(|e| Error::Degenerate(format!("boundary insertion failed: {e:?}")))?;
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(ANGLE_LIMIT_DEG))
        .with_max_allowed_area(tri_cap)
        .exclude_outer_faces(true)
        .with_max_additional_vertices(4 * estimate + 1000);
    let result = cdt.refine(params);
    if cdt.num_vertices() > MAX_NODES {
        return Err(Error::TooFine(cdt.num_vertices()));
    }
    let excluded: std::collections::HashSet<_> = result.excluded_faces.into_iter().collect();

    let nodes: Vec<Point> = cdt
        .vertices()
        .map(|v| {
            let p = v.position();
            Point::new(p.x, p.y)
        })
        .collect();
    let mut triangles = Vec::with_capacity(cdt.num_inner_faces());
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let [a, b, c] = face.vertices().map(|v| v.fix().index());
        if tri_area(nodes[a], nodes[b], nodes[c]) > 0.0 {
            triangles.push([a, b, c]);
        } else {
            triangles.push([a, c, b]);
        }
    }
    let mut boundary = vec![false; nodes.len()];
    for e in cdt.undirected_edges() {
        if cdt.is_constraint_edge(e.fix()) {
            for v in e.vertices() {
                boundary[v.fix().index()] = true;
            }
        }
    }
    Ok(Mesh { nodes, triangles, boundary, h, domain: poly.clone() })
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_area(&self, k: usize) -> f64 {
        let [a, b, c] = self.triangles[k];
        tri_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn centroid(&self, k: usize) -> Point {
        let [a, b, c] = self.triangles[k];
        (self.nodes[a] + self.nodes[b] + self.nodes[c]) * (1.0 / 3.0)
    }

    /// Splits every triangle into four through its edge midpoints. The result is nested in
    /// `self` and has half the edge lengths; boundary midpoints stay on `∂Ω` because the
    /// boundary edges are straight.
    pub fn refine_uniform(&self) -> Result<Mesh> {
        let mut edge_count: HashMap<(usize, usize), u8> = HashMap::with_capacity(3 * self.triangles.len());
        for t in &self.triangles {
            for j in 0..3 {
                let (a, b) = (t[j], t[(j + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let new_nodes = self.nodes.len() + edge_count.len();
        if new_nodes > MAX_NODES {
            return Err(Error::TooFine(new_nodes));
        }
        let mut nodes = self.nodes.clone();
        let mut boundary = self.boundary.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::with_capacity(edge_count.len());
        let mut keys: Vec<_> = edge_count.iter().map(|(&k, &c)| (k, c)).collect();
        keys.sort_unstable();
        for ((a, b), count) in keys {
            mid.insert((a, b), nodes.len());
            nodes.push(self.nodes[a].midpoint(self.nodes[b]));
            boundary.push(count == 1);
        }
        let m = |a: usize, b: usize| mid[&(a.min(b), a.max(b))];
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        Ok(Mesh { nodes, triangles, boundary, h: 0.5 * self.h, domain: self.domain.clone() })
    }

    pub fn stats(&self) -> MeshStats {
        let mut max_edge: f64 = 0.0;
        let mut min_angle = f64::INFINITY;
        let mut total_area = 0.0;
        for (k, t) in self.triangles.iter().enumerate() {
            total_area += self.triangle_area(k);
            for j in 0..3 {
                let p = self.nodes[t[j]];
                let u = self.nodes[t[(j + 1) % 3]] - p;
                let v = self.nodes[t[(j + 2) % 3]] - p;
                max_edge = max_edge.max(u.norm());
                let ang = u.cross(v).abs().atan2(u.dot(v));
                min_angle = min_angle.min(ang);
            }
        }
        MeshStats {
            nodes: self.nodes.len(),
            triangles: self.triangles.len(),
            boundary_nodes: self.boundary.iter().filter(|&&b| b).count(),
            max_edge,
            min_angle_deg: min_angle.to_degrees(),
            total_area,
        }
    }

    /// Largest distance from a boundary-flagged node to `∂Ω`.
    pub fn boundary_defect(&self) -> f64 {
        self.nodes
            .iter()
            .zip(&self.boundary)
            .filter(|(_, &b)| b)
            .map(|(&p, _)| self.domain.boundary_distance(p).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::from_vertices(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn coarse_square_mesh() {
        let m = triangulate(&unit_square(), 0.5).unwrap();
        let s = m.stats();
        assert!(s.triangles >= 8);
        assert!((s.total_area - 1.0).abs() < 1e-12);
        assert!(m.boundary_defect() < 1e-12);
        assert!(s.max_edge <= 0.5 * 1.5);
        for k in 0..m.triangles.len() {
            assert!(m.triangle_area(k) > 0.0);
        }
    }

    #[test]
    fn fine_square_mesh_scales_like_inverse_h_squared() {
        let a = triangulate(&unit_square(), 1.0 / 16.0).unwrap().stats();
        let b = triangulate(&unit_square(), 1.0 / 32.0).unwrap().stats();
        let ratio = b.nodes as f64 / a.nodes as f64;
        assert!(ratio > 3.0 && ratio < 5.0, "{ratio}");
        assert!(a.min_angle_deg >= 15.0 && b.min_angle_deg >= 15.0);
    }

    #[test]
    fn uniform_refinement_is_nested() {
        let m = triangulate(&unit_square(), 0.25).unwrap();
        let r = m.refine_uniform().unwrap();
        let (s, t) = (m.stats(), r.stats());
        assert_eq!(t.triangles, 4 * s.triangles);
        assert!((t.total_area - 1.0).abs() < 1e-12);
        assert!((t.max_edge - 0.5 * s.max_edge).abs() < 1e-12);
        assert!((t.min_angle_deg - s.min_angle_deg).abs() < 1e-9);
        assert!(r.boundary_defect() < 1e-12);
        assert_eq!(&r.nodes[..m.nodes.len()], &m.nodes[..]);
    }

    #[test]
    fn thin_rectangle_mesh() {
        let rect = ConvexPolygon::from_vertices(&[(0.0, 0.0), (10.0, 0.0), (10.0, 0.1), (0.0, 0.1)]).unwrap();
        let m = triangulate(&rect, 0.02).unwrap();
        let s = m.stats();
        assert!((s.total_area - 1.0).abs() < 1e-12);
        assert!(s.min_angle_deg >= 15.0);
        // about area / (√3/4 h²) triangles, not more than a small multiple
        assert!(s.triangles < 20_000, "{}", s.triangles);
        assert!(m.boundary_defect() < 1e-12);
    }

    #[test]
    fn rejects_absurd_sizes() {
        assert!(matches!(triangulate(&unit_square(), 1e-5), Err(Error::TooFine(_))));
        assert!(triangulate(&unit_square(), 0.0).is_err());
    }
}
