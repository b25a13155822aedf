//! Geodesic polygons on the unit sphere, used as vertex links.

use std::f64::consts::PI;

use serde::Serialize;

use super::Point;
use crate::error::{Error, Result};

/// A region of the unit sphere bounded by great-circle arcs.
///
/// `corners`/`angles` describe the boundary cycle (empty when the boundary
/// is a full great circle, as for a hemisphere). `triangles` is a coarse
/// conforming geodesic triangulation of the region, each triangle smaller
/// than a hemisphere.
#[derive(Debug, Clone, Serialize)]
pub struct SphericalPolygon {
    corners: Vec<[f64; 3]>,
    angles: Vec<f64>,
    triangles: Vec<[[f64; 3]; 3]>,
}

/// Area of the geodesic triangle with unit-vector corners.
pub fn spherical_triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    let num = a.dot(&b.cross(c)).abs();
    let den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * num.atan2(den)
}

fn arr(p: &Point) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn pt(a: &[f64; 3]) -> Point {
    Point::new(a[0], a[1], a[2])
}

impl SphericalPolygon {
    pub fn new(corners: Vec<Point>, angles: Vec<f64>, triangles: Vec<[Point; 3]>) -> Result<Self> {
        if corners.len() != angles.len() {
            return Err(Error::InvalidArgument("corner/angle count mismatch".into()));
        }
        let poly = SphericalPolygon {
            corners: corners.iter().map(|p| arr(&p.normalize())).collect(),
            angles,
            triangles: triangles
                .iter()
                .map(|t| {
                    [
                        arr(&t[0].normalize()),
                        arr(&t[1].normalize()),
                        arr(&t[2].normalize()),
                    ]
                })
                .collect(),
        };
        poly.validate()?;
        Ok(poly)
    }

    /// Union of coordinate octants, each given by its sign pattern.
    pub fn from_octants(signs: &[[f64; 3]]) -> Result<Self> {
        let triangles = signs
            .iter()
            .map(|s| {
                [
                    Point::new(s[0].signum(), 0.0, 0.0),
                    Point::new(0.0, s[1].signum(), 0.0),
                    Point::new(0.0, 0.0, s[2].signum()),
                ]
            })
            .collect();
        Self::new(Vec::new(), Vec::new(), triangles)
    }

    /// Upper hemisphere z > 0.
    pub fn hemisphere() -> Self {
        let signs: Vec<[f64; 3]> =
            [[1., 1., 1.], [-1., 1., 1.], [-1., -1., 1.], [1., -1., 1.]].to_vec();
        Self::from_octants(&signs).expect("hemisphere is valid")
    }

    pub fn octant() -> Self {
        Self::from_octants(&[[1., 1., 1.]]).expect("octant is valid")
    }

    fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::Degenerate("spherical polygon has no area".into()));
        }
        let area = self.triangulated_area();
        if area <= 1e-12 {
            return Err(Error::Degenerate("zero-area spherical polygon".into()));
        }
        if area >= 4.0 * PI - 1e-9 {
            return Err(Error::Degenerate(
                "spherical region covers the whole sphere (no Dirichlet boundary)".into(),
            ));
        }
        if !self.is_connected() {
            return Err(Error::Degenerate(
                "spherical region is not connected".into(),
            ));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.triangles.len();
        let key = |p: &[f64; 3]| {
            [
                (p[0] * 1e9).round() as i64,
                (p[1] * 1e9).round() as i64,
                (p[2] * 1e9).round() as i64,
            ]
        };
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if seen[j] {
                    continue;
                }
                let shared = self.triangles[i]
                    .iter()
                    .filter(|p| self.triangles[j].iter().any(|q| key(p) == key(q)))
                    .count();
                if shared >= 2 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn corners(&self) -> Vec<Point> {
        self.corners.iter().map(pt).collect()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn triangles(&self) -> Vec<[Point; 3]> {
        self.triangles
            .iter()
            .map(|t| [pt(&t[0]), pt(&t[1]), pt(&t[2])])
            .collect()
    }

    /// Area from the boundary angles (spherical excess / Gauss-Bonnet) when a
    /// corner cycle is known, otherwise from the triangulation.
    pub fn area(&self) -> f64 {
        if self.angles.is_empty() {
            self.triangulated_area()
        } else {
            let k = self.angles.len() as f64;
            self.angles.iter().sum::<f64>() - (k - 2.0) * PI
        }
    }

    pub fn triangulated_area(&self) -> f64 {
        self.triangles()
            .iter()
            .map(|t| spherical_triangle_area(&t[0], &t[1], &t[2]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octant_and_hemisphere_areas() {
        assert!((SphericalPolygon::octant().area() - PI / 2.0).abs() < 1e-12);
        assert!((SphericalPolygon::hemisphere().area() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn whole_sphere_is_rejected() {
        let all: Vec<[f64; 3]> = (0..8)
            .map(|i| {
                [
                    if i & 1 == 0 { 1.0 } else { -1.0 },
                    if i & 2 == 0 { 1.0 } else { -1.0 },
                    if i & 4 == 0 { 1.0 } else { -1.0 },
                ]
            })
            .collect();
        assert!(matches!(
            SphericalPolygon::from_octants(&all),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn disconnected_octants_are_rejected() {
        let r = SphericalPolygon::from_octants(&[[1., 1., 1.], [-1., -1., -1.]]);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }
}
