//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use navplan::geom::{ConvexPolygon, Vec2};
use rand::Rng;

/// Convex hull by Andrew's monotone chain, counter-clockwise, without
/// collinear points.
pub fn hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Vec2, a: Vec2, b: Vec2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut lower: Vec<Vec2> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-12 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-12 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Minkowski sum by brute force: every vertex pair summed, then hulled.
pub fn minkowski_oracle(a: &ConvexPolygon, b: &ConvexPolygon) -> Vec<Vec2> {
    let mut sums = Vec::new();
    for &p in a.vertices() {
        for &q in b.vertices() {
            sums.push(p + q);
        }
    }
    hull(&sums)
}

/// Whether two vertex loops describe the same polygon: same vertex count and
/// every vertex of one within `tol` of a vertex of the other.
pub fn same_loop(a: &[Vec2], b: &[Vec2], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| p.distance(*q) <= tol))
        && b.iter().all(|p| a.iter().any(|q| p.distance(*q) <= tol))
}

/// Convex polygon with 3 to 9 vertices on a random ellipse.
pub fn random_convex<R: Rng>(rng: &mut R) -> ConvexPolygon {
    loop {
        let n = rng.gen_range(3..10);
        let (ax, ay) = (rng.gen_range(0.3..5.0), rng.gen_range(0.3..5.0));
        let (cx, cy) = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        let rot: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Vec2> =
            angles.iter().map(|t| Vec2::new(ax * t.cos(), ay * t.sin()).rotated(rot) + Vec2::new(cx, cy)).collect();
        if let Ok(p) = ConvexPolygon::new(pts) {
            return p;
        }
    }
}

/// Point-in-polygon by testing every edge's half-plane.
pub fn halfplane_contains(poly: &ConvexPolygon, q: Vec2) -> bool {
    let v = poly.vertices();
    (0..v.len()).all(|i| {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        (b - a).cross(q - a) >= 0.0
    })
}
