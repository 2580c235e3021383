//! Convex planar polygons and their classical metrics.

pub mod calipers;
pub mod chebyshev;
mod point;
mod polygon;

use serde::Serialize;

pub use point::Point;
pub use polygon::{
    signed_area, ConvexPolygon, EdgeLine, VertexList, COLLINEAR_TOLERANCE, MIN_AREA, VERTEX_SEPARATION,
};

/// Area, perimeter, diameter, minimal width and inradius of a convex body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodyMetrics {
    pub area: f64,
    pub perimeter: f64,
    pub diameter: f64,
    pub width: f64,
    /// Unit direction `y` with `h(y) + h(-y) = width`.
    pub width_direction: Point,
    pub inradius: f64,
    pub incenter: Point,
}

impl BodyMetrics {
    /// `|Ω| / (P(Ω) R_Ω)`, in `[1/2, 1)` for planar convex bodies.
    pub fn area_ratio(&self) -> f64 {
        self.area / (self.perimeter * self.inradius)
    }

    pub fn width_over_inradius(&self) -> f64 {
        self.width / self.inradius
    }

    pub fn width_over_diameter(&self) -> f64 {
        self.width / self.diameter
    }

    /// Isoperimetric deficit `P² - 4π|Ω|`.
    pub fn isoperimetric_gap(&self) -> f64 {
        self.perimeter * self.perimeter - 4.0 * std::f64::consts::PI * self.area
    }
}

/// Computes all metrics of a polygon.
pub fn metrics(poly: &ConvexPolygon) -> BodyMetrics {
    let v = poly.vertices();
    let (diameter, _) = calipers::diameter(v);
    let (width, width_direction) = calipers::minimal_width(v);
    let (incenter, inradius) = chebyshev::chebyshev_center(&poly.edge_lines());
    BodyMetrics {
        area: poly.area(),
        perimeter: poly.perimeter(),
        diameter,
        width,
        width_direction,
        inradius,
        incenter,
    }
}

impl ConvexPolygon {
    pub fn metrics(&self) -> BodyMetrics {
        metrics(self)
    }
}
