//! Planar predicates on 2D point lists (z ignored).

use super::Point;
use crate::config::GEOM_TOL;

pub fn cross2(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Twice the signed area of the polygon.
pub fn signed_area2(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let a = &pts[i];
            let b = &pts[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum()
}

/// Distance from `p` to the closed segment `[a, b]` (any dimension).
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    (p - closest_on_segment(p, a, b)).norm()
}

pub fn closest_on_segment(p: &Point, a: &Point, b: &Point) -> Point {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    cross2(&(b - a), &(c - a))
}

fn on_segment(a: &Point, b: &Point, p: &Point, tol: f64) -> bool {
    point_segment_distance(p, a, b) <= tol
}

/// Closed-segment intersection test in the xy-plane.
pub fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let scale = (b - a).norm().max((d - c).norm()).max(1.0);
    let tol = GEOM_TOL * scale;
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    let t = tol * scale;
    if ((o1 > t && o2 < -t) || (o1 < -t && o2 > t)) && ((o3 > t && o4 < -t) || (o3 < -t && o4 > t))
    {
        return true;
    }
    on_segment(a, b, c, tol)
        || on_segment(a, b, d, tol)
        || on_segment(c, d, a, tol)
        || on_segment(c, d, b, tol)
}

/// Winding-number point-in-polygon test (strict interior, boundary excluded by caller).
pub fn winding_number(pts: &[Point], p: &Point) -> i32 {
    let n = pts.len();
    let mut wn = 0;
    for i in 0..n {
        let a = &pts[i];
        let b = &pts[(i + 1) % n];
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) < 0.0 {
            wn -= 1;
        }
    }
    wn
}

pub fn boundary_distance(pts: &[Point], p: &Point) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| point_segment_distance(p, &pts[i], &pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}
