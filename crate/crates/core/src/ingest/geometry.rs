//! Planar geometry over digitized map coordinates.
//!
//! Coordinates are abstract map units (the digitized exports carry pixel
//! positions, not calibrated geodetic coordinates), so everything here is
//! plain Euclidean geometry.

use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Where a point sits relative to a polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointLocation {
    Inside,
    OnBoundary,
    Outside,
}

/// A polygon made of closed rings. Ring 0 is the outer boundary, any
/// further rings are holes.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarPolygon {
    rings: Vec<Vec<PlanarPoint>>,
}

impl PlanarPolygon {
    /// Builds a polygon, closing any open ring and rejecting rings with
    /// fewer than three distinct vertices or non-finite coordinates.
    pub fn new(rings: Vec<Vec<PlanarPoint>>) -> Result<Self, IngestError> {
        if rings.is_empty() {
            return Err(IngestError::InvalidPolygon("polygon has no rings".into()));
        }
        let mut closed = Vec::with_capacity(rings.len());
        for (idx, mut ring) in rings.into_iter().enumerate() {
            if ring.iter().any(|p| !p.is_finite()) {
                return Err(IngestError::InvalidPolygon(format!(
                    "ring {idx} has a non-finite vertex"
                )));
            }
            let mut distinct: Vec<PlanarPoint> = Vec::new();
            for p in &ring {
                if !distinct.contains(p) {
                    distinct.push(*p);
                }
            }
            if distinct.len() < 3 {
                return Err(IngestError::InvalidPolygon(format!(
                    "ring {idx} has {} distinct vertices, need at least 3",
                    distinct.len()
                )));
            }
            if ring.first() != ring.last() {
                ring.push(ring[0]);
            }
            closed.push(ring);
        }
        Ok(Self { rings: closed })
    }

    pub fn rings(&self) -> &[Vec<PlanarPoint>] {
        &self.rings
    }

    pub fn outer(&self) -> &[PlanarPoint] {
        &self.rings[0]
    }

    pub fn locate(&self, p: PlanarPoint) -> PointLocation {
        let mut inside = false;
        for ring in &self.rings {
            for seg in ring.windows(2) {
                if on_segment(p, seg[0], seg[1]) {
                    return PointLocation::OnBoundary;
                }
            }
            if ray_crossings_odd(p, ring) {
                inside = !inside;
            }
        }
        if inside {
            PointLocation::Inside
        } else {
            PointLocation::Outside
        }
    }
}

/// Even-odd containment. Points on any ring edge (outer or hole) count as
/// inside.
pub fn point_in_polygon(p: PlanarPoint, poly: &PlanarPolygon) -> bool {
    poly.locate(p) != PointLocation::Outside
}

fn on_segment(p: PlanarPoint, a: PlanarPoint, b: PlanarPoint) -> bool {
    let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if cross != 0.0 {
        return false;
    }
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

// Horizontal ray towards +x; half-open edge rule so shared vertices are
// counted once.
fn ray_crossings_odd(p: PlanarPoint, ring: &[PlanarPoint]) -> bool {
    let mut odd = false;
    for seg in ring.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_at {
                odd = !odd;
            }
        }
    }
    odd
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<PlanarPoint> {
        vec![
            PlanarPoint::new(x0, y0),
            PlanarPoint::new(x1, y0),
            PlanarPoint::new(x1, y1),
            PlanarPoint::new(x0, y1),
        ]
    }

    #[test]
    fn unit_square_membership() {
        let poly = PlanarPolygon::new(vec![square(0.0, 0.0, 1.0, 1.0)]).unwrap();
        assert!(point_in_polygon(PlanarPoint::new(0.5, 0.5), &poly));
        assert!(!point_in_polygon(PlanarPoint::new(2.0, 0.0), &poly));
    }

    #[test]
    fn hole_excludes_interior() {
        let poly = PlanarPolygon::new(vec![
            square(0.0, 0.0, 1.0, 1.0),
            square(0.25, 0.25, 0.75, 0.75),
        ])
        .unwrap();
        assert!(!point_in_polygon(PlanarPoint::new(0.5, 0.5), &poly));
        assert!(point_in_polygon(PlanarPoint::new(0.1, 0.5), &poly));
        // hole edge is boundary, boundary counts inside
        assert!(point_in_polygon(PlanarPoint::new(0.25, 0.5), &poly));
    }

    #[test]
    fn edges_and_vertices_count_inside() {
        let poly = PlanarPolygon::new(vec![square(0.0, 0.0, 1.0, 1.0)]).unwrap();
        assert_eq!(
            poly.locate(PlanarPoint::new(1.0, 0.5)),
            PointLocation::OnBoundary
        );
        assert_eq!(
            poly.locate(PlanarPoint::new(0.0, 0.0)),
            PointLocation::OnBoundary
        );
        assert_eq!(
            poly.locate(PlanarPoint::new(0.5, 1.0)),
            PointLocation::OnBoundary
        );
        assert_eq!(
            poly.locate(PlanarPoint::new(1.0, 1.5)),
            PointLocation::Outside
        );
    }

    #[test]
    fn open_rings_are_closed() {
        let poly = PlanarPolygon::new(vec![square(0.0, 0.0, 1.0, 1.0)]).unwrap();
        let ring = poly.outer();
        assert_eq!(ring.len(), 5);
        assert_eq!(ring.first(), ring.last());
    }

    #[test]
    fn degenerate_rings_rejected() {
        let two = vec![
            PlanarPoint::new(0.0, 0.0),
            PlanarPoint::new(1.0, 0.0),
            PlanarPoint::new(0.0, 0.0),
        ];
        assert!(PlanarPolygon::new(vec![two]).is_err());
        assert!(PlanarPolygon::new(vec![]).is_err());
        let nan = vec![
            PlanarPoint::new(0.0, 0.0),
            PlanarPoint::new(f64::NAN, 0.0),
            PlanarPoint::new(0.0, 1.0),
        ];
        assert!(PlanarPolygon::new(vec![nan]).is_err());
    }

    #[test]
    fn concave_polygon_with_vertex_on_ray() {
        // U shape; the ray from (1.5, 1) passes through vertex (2, 1).
        let ring = vec![
            PlanarPoint::new(0.0, 0.0),
            PlanarPoint::new(3.0, 0.0),
            PlanarPoint::new(3.0, 3.0),
            PlanarPoint::new(2.0, 3.0),
            PlanarPoint::new(2.0, 1.0),
            PlanarPoint::new(1.0, 1.0),
            PlanarPoint::new(1.0, 3.0),
            PlanarPoint::new(0.0, 3.0),
        ];
        let poly = PlanarPolygon::new(vec![ring]).unwrap();
        assert!(point_in_polygon(PlanarPoint::new(0.5, 2.0), &poly));
        assert!(!point_in_polygon(PlanarPoint::new(1.5, 2.0), &poly));
        assert!(point_in_polygon(PlanarPoint::new(0.5, 1.0), &poly));
        assert!(point_in_polygon(PlanarPoint::new(2.5, 0.5), &poly));
    }
}
