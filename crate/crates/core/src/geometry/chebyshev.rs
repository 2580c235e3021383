//! Largest inscribed disk (Chebyshev center) of a convex polygon.
//!
//! The primal program is
//!
//! ```text
//! maximize r   subject to   n_i · c + r <= b_i   for every edge line (n_i, b_i)
//! ```
//!
//! with unit outward normals `n_i`. Its dual has three equality rows,
//!
//! ```text
//! minimize Σ b_i λ_i   subject to   Σ λ_i n_i = 0,   Σ λ_i = 1,   λ >= 0,
//! ```
//!
//! which a dense tableau simplex with Bland's rule handles directly. The primal
//! center and radius are read off the optimal simplex multipliers.

use super::{EdgeLine, Point};

const PIVOT_EPS: f64 = 1e-12;

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows` constraint rows, each `cols + 1` wide (last entry is the right-hand side).
    a: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.a[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.cols + 1;
        let p = self.a[row * w + col];
        for c in 0..w {
            self.a[row * w + c] /= p;
        }
        for r in 0..self.rows {
            if r == row {
                continue;
            }
            let factor = self.a[r * w + col];
            if factor != 0.0 {
                for c in 0..w {
                    self.a[r * w + c] -= factor * self.a[row * w + c];
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland's-rule simplex iterations for the cost vector over `allowed` columns.
    fn optimize(&mut self, cost: &[f64], allowed: usize) {
        loop {
            // reduced costs: c_j - c_B B^{-1} A_j
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = (0..self.rows).map(|r| cost[self.basis[r]] * self.at(r, j)).sum();
                cost[j] - z < -PIVOT_EPS
            });
            let Some(col) = entering else { return };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let coef = self.at(r, col);
                if coef > PIVOT_EPS {
                    let ratio = self.rhs(r) / coef;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-15
                                || (ratio <= lratio + 1e-15 && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                // The dual is bounded below for a bounded polygon; an unbounded
                // column can only come from roundoff, so stop.
                None => return,
            }
        }
    }
}

/// Chebyshev center and inradius of the polygon bounded by `lines`.
pub fn chebyshev_center(lines: &[EdgeLine]) -> (Point, f64) {
    let k = lines.len();
    let cols = k + 3;
    let rows = 3;
    let w = cols + 1;
    let mut a = vec![0.0; rows * w];
    for (j, l) in lines.iter().enumerate() {
        a[j] = l.normal.x;
        a[w + j] = l.normal.y;
        a[2 * w + j] = 1.0;
    }
    for r in 0..rows {
        a[r * w + k + r] = 1.0;
    }
    a[2 * w + cols] = 1.0;
    let mut tab = Tableau {
        rows,
        cols,
        a,
        basis: vec![k, k + 1, k + 2],
    };

    // Phase 1: minimize the artificial sum.
    let mut phase1 = vec![0.0; cols];
    for c in phase1.iter_mut().skip(k) {
        *c = 1.0;
    }
    tab.optimize(&phase1, cols);

    // Drive zero-level artificials out of the basis.
    for r in 0..rows {
        if tab.basis[r] >= k {
            if let Some(col) = (0..k)
                .filter(|j| !tab.basis.contains(j))
                .max_by(|&x, &y| tab.at(r, x).abs().total_cmp(&tab.at(r, y).abs()))
            {
                if tab.at(r, col).abs() > PIVOT_EPS {
                    tab.pivot(r, col);
                }
            }
        }
    }

    // Phase 2 over the edge columns only.
    let mut cost = vec![0.0; cols];
    for (j, l) in lines.iter().enumerate() {
        cost[j] = l.offset;
    }
    tab.optimize(&cost, k);

    // Multipliers y = c_B^T B^{-1}; B^{-1} sits in the artificial columns.
    let mut y = [0.0; 3];
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = (0..rows).map(|r| cost[tab.basis[r]] * tab.at(r, k + i)).sum();
    }
    let center = Point::new(y[0], y[1]);
    let radius = lines
        .iter()
        .map(|l| l.inner_distance(center))
        .fold(f64::INFINITY, f64::min);
    (center, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolygon;

    #[test]
    fn square_incircle() {
        let sq = ConvexPolygon::from_vertices(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]).unwrap();
        let (c, r) = chebyshev_center(&sq.edge_lines());
        assert!((r - 0.5).abs() < 1e-15);
        assert!((c.x - 0.5).abs() < 1e-15 && (c.y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rectangle_has_a_segment_of_centers() {
        let rect = ConvexPolygon::from_vertices(&[(-5.0, -0.05), (5.0, -0.05), (5.0, 0.05), (-5.0, 0.05)]).unwrap();
        let (c, r) = chebyshev_center(&rect.edge_lines());
        assert!((r - 0.05).abs() < 1e-15);
        assert!(c.x.abs() <= 4.95 + 1e-12);
    }

    #[test]
    fn right_triangle_inradius() {
        // legs 3, 4, hypotenuse 5: r = (3 + 4 - 5) / 2 = 1
        let t = ConvexPolygon::from_vertices(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]).unwrap();
        let (c, r) = chebyshev_center(&t.edge_lines());
        assert!((r - 1.0).abs() < 1e-14);
        assert!((c.x - 1.0).abs() < 1e-14 && (c.y - 1.0).abs() < 1e-14);
    }
}
