//! Rotating calipers over a counter-clockwise convex vertex list.

use super::Point;

/// Below this vertex count the diameter is found by checking all pairs.
const BRUTE_FORCE_LIMIT: usize = 64;

/// Distance from `x` to the line through edge `i` of `v` (inward positive).
#[inline]
fn edge_height(v: &[Point], i: usize, x: Point) -> f64 {
    let n = v.len();
    let (a, b) = (v[i], v[(i + 1) % n]);
    let e = b - a;
    e.cross(x - a) / e.norm()
}

/// Minimal width and the unit direction achieving it.
///
/// The minimum of `h(y) + h(-y)` over a polygon is attained at an edge normal, where the
/// width equals the largest vertex height above that edge.
pub fn minimal_width(v: &[Point]) -> (f64, Point) {
    let n = v.len();
    let mut j = 1;
    let mut best = (f64::INFINITY, Point::new(1.0, 0.0));
    for i in 0..n {
        if j == i {
            j = (j + 1) % n;
        }
        while edge_height(v, i, v[(j + 1) % n]) >= edge_height(v, i, v[j]) && (j + 1) % n != i {
            j = (j + 1) % n;
        }
        let w = edge_height(v, i, v[j]);
        if w < best.0 {
            let e = v[(i + 1) % n] - v[i];
            let len = e.norm();
            best = (w, Point::new(e.y / len, -e.x / len));
        }
    }
    best
}

/// Diameter and an endpoint pair achieving it.
pub fn diameter(v: &[Point]) -> (f64, (Point, Point)) {
    if v.len() < BRUTE_FORCE_LIMIT {
        diameter_brute_force(v)
    } else {
        diameter_calipers(v)
    }
}

pub fn diameter_brute_force(v: &[Point]) -> (f64, (Point, Point)) {
    let mut best = (0.0, (v[0], v[0]));
    for (i, &a) in v.iter().enumerate() {
        for &b in &v[i + 1..] {
            let d = a.distance(b);
            if d > best.0 {
                best = (d, (a, b));
            }
        }
    }
    best
}

/// Antipodal-pair sweep: for each edge, advance the opposite pointer while the
/// height grows and test both edge endpoints against it.
pub fn diameter_calipers(v: &[Point]) -> (f64, (Point, Point)) {
    let n = v.len();
    let mut best = (0.0, (v[0], v[0]));
    let mut consider = |a: Point, b: Point| {
        let d = a.distance(b);
        if d > best.0 {
            best = (d, (a, b));
        }
    };
    let mut j = 1;
    for i in 0..n {
        let i1 = (i + 1) % n;
        if j == i {
            j = (j + 1) % n;
        }
        while (j + 1) % n != i && edge_height(v, i, v[(j + 1) % n]) > edge_height(v, i, v[j]) {
            j = (j + 1) % n;
        }
        consider(v[i], v[j]);
        consider(v[i1], v[j]);
        // Ties: the next vertex may be equally far from the edge (parallel edges).
        let jn = (j + 1) % n;
        if jn != i {
            consider(v[i], v[jn]);
            consider(v[i1], v[jn]);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn regular(k: usize, r: f64) -> Vec<Point> {
        (0..k)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / k as f64;
                Point::new(r * a.cos(), r * a.sin())
            })
            .collect()
    }

    #[test]
    fn square_width_and_diameter() {
        let sq = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        assert_eq!(minimal_width(&sq).0, 1.0);
        assert_eq!(diameter(&sq).0, 2f64.sqrt());
        assert_eq!(diameter_calipers(&sq).0, 2f64.sqrt());
    }

    #[test]
    fn calipers_match_brute_force_on_regular_polygons() {
        for k in [3, 4, 5, 7, 64, 65, 128, 257] {
            let v = regular(k, 1.3);
            let (a, _) = diameter_calipers(&v);
            let (b, _) = diameter_brute_force(&v);
            assert!((a - b).abs() < 1e-14, "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn triangle_width_is_smallest_altitude() {
        let t = [Point::new(0.0, 0.0), Point::new(4.0, 0.0), Point::new(1.0, 1.0)];
        let (w, dir) = minimal_width(&t);
        assert!((w - 1.0).abs() < 1e-15);
        assert!((dir.y + 1.0).abs() < 1e-15);
    }
}
