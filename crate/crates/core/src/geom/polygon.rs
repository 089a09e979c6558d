use serde::{Deserialize, Serialize};

use super::{GeomError, Vec2};

/// Relative tolerance used when merging collinear vertices.
const MERGE_EPS: f64 = 1e-12;

/// A strictly convex polygon stored counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

impl TryFrom<Vec<Vec2>> for ConvexPolygon {
    type Error = GeomError;
    fn try_from(v: Vec<Vec2>) -> Result<Self, Self::Error> {
        ConvexPolygon::new(v)
    }
}

impl From<ConvexPolygon> for Vec<Vec2> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    /// Builds a polygon from an ordered vertex loop (either winding).
    ///
    /// Duplicate and collinear vertices are merged; the result is oriented
    /// counter-clockwise. Fails if fewer than three vertices remain or the
    /// loop is not convex.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeomError> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let scale = vertices.iter().map(|v| v.x.abs().max(v.y.abs())).fold(1.0_f64, f64::max);
        let tol = MERGE_EPS * scale * scale;

        let mut vs = vertices;
        if signed_area(&vs) < 0.0 {
            vs.reverse();
        }
        let vs = merge_degenerate(vs, tol, scale);
        if vs.len() < 3 {
            return Err(GeomError::Degenerate(vs.len()));
        }
        let n = vs.len();
        for i in 0..n {
            let a = vs[i];
            let b = vs[(i + 1) % n];
            let c = vs[(i + 2) % n];
            if (b - a).cross(c - b) <= tol {
                return Err(GeomError::NotConvex);
            }
        }
        // A star-shaped loop that winds twice has every turn positive but
        // total turning 4π.
        let turning: f64 = (0..n)
            .map(|i| {
                let e0 = vs[(i + 1) % n] - vs[i];
                let e1 = vs[(i + 2) % n] - vs[(i + 1) % n];
                e0.cross(e1).atan2(e0.dot(e1))
            })
            .sum();
        if (turning - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(GeomError::NotConvex);
        }
        Ok(Self { vertices: vs })
    }

    /// Axis-aligned rectangle centred on the origin.
    pub fn rectangle(length: f64, width: f64) -> Result<Self, GeomError> {
        let (hl, hw) = (0.5 * length, 0.5 * width);
        Self::new(vec![Vec2::new(-hl, -hw), Vec2::new(hl, -hw), Vec2::new(hl, hw), Vec2::new(-hl, hw)])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Point reflection through the origin.
    pub fn negated(&self) -> ConvexPolygon {
        // -v of a CCW loop is still CCW.
        ConvexPolygon { vertices: self.vertices.iter().map(|v| -*v).collect() }
    }

    /// Rigid transform: rotate by `heading` about the origin, then translate.
    pub fn transformed(&self, position: Vec2, heading: f64) -> ConvexPolygon {
        let (s, c) = heading.sin_cos();
        ConvexPolygon {
            vertices: self
                .vertices
                .iter()
                .map(|v| Vec2::new(c * v.x - s * v.y + position.x, s * v.x + c * v.y + position.y))
                .collect(),
        }
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn centroid(&self) -> Vec2 {
        let n = self.vertices.len() as f64;
        self.vertices.iter().fold(Vec2::ZERO, |acc, v| acc + *v) * (1.0 / n)
    }

    /// Largest vertex distance from the origin.
    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when `q` is inside or on the boundary.
    pub fn contains(&self, q: Vec2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(q - a) >= 0.0
        })
    }

    /// Euclidean distance from `q` to the polygon; zero inside.
    pub fn distance_to(&self, q: Vec2) -> f64 {
        if self.contains(q) {
            return 0.0;
        }
        let n = self.vertices.len();
        (0..n).map(|i| segment_distance(q, self.vertices[i], self.vertices[(i + 1) % n])).fold(f64::INFINITY, f64::min)
    }

    /// Separating-axis overlap test; touching counts as overlap.
    pub fn intersects(&self, other: &ConvexPolygon) -> bool {
        !has_separating_axis(self, other) && !has_separating_axis(other, self)
    }

    /// Distance between two polygons; zero when they overlap.
    pub fn distance_between(&self, other: &ConvexPolygon) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (p, q) in [(self, other), (other, self)] {
            let n = q.vertices.len();
            for v in &p.vertices {
                for i in 0..n {
                    best = best.min(segment_distance(*v, q.vertices[i], q.vertices[(i + 1) % n]));
                }
            }
        }
        best
    }
}

fn has_separating_axis(a: &ConvexPolygon, b: &ConvexPolygon) -> bool {
    let n = a.vertices.len();
    (0..n).any(|i| {
        let p = a.vertices[i];
        let e = a.vertices[(i + 1) % n] - p;
        // Outward side of a CCW edge is negative cross.
        b.vertices.iter().all(|v| e.cross(*v - p) < 0.0)
    })
}

pub(crate) fn segment_distance(q: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    let t = if len2 > 0.0 { ((q - a).dot(ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a + ab * t).distance(q)
}

fn signed_area(vs: &[Vec2]) -> f64 {
    let n = vs.len();
    0.5 * (0..n).map(|i| vs[i].cross(vs[(i + 1) % n])).sum::<f64>()
}

fn merge_degenerate(mut vs: Vec<Vec2>, tol: f64, scale: f64) -> Vec<Vec2> {
    let dup = MERGE_EPS * scale;
    loop {
        let n = vs.len();
        if n < 3 {
            return vs;
        }
        let mut removed = false;
        for i in 0..n {
            let prev = vs[(i + n - 1) % n];
            let cur = vs[i];
            let next = vs[(i + 1) % n];
            let flat = (cur - prev).cross(next - cur).abs() <= tol && (cur - prev).dot(next - cur) >= 0.0;
            if cur.distance(prev) <= dup || flat {
                vs.remove(i);
                removed = true;
                break;
            }
        }
        if !removed {
            return vs;
        }
    }
}

fn bottom_left(vs: &[Vec2]) -> usize {
    let mut idx = 0;
    for (i, v) in vs.iter().enumerate() {
        let b = vs[idx];
        if v.y < b.y || (v.y == b.y && v.x < b.x) {
            idx = i;
        }
    }
    idx
}

/// Minkowski sum of two convex polygons by merging their edge sequences in
/// angular order. Runs in `O(|a| + |b|)`.
///
/// To form the obstacle `O_n ⊕ (−O_e)` pass `ego.negated()` as `b`.
pub fn minkowski_sum(a: &ConvexPolygon, b: &ConvexPolygon) -> Result<ConvexPolygon, GeomError> {
    let (p, q) = (&a.vertices, &b.vertices);
    let (n, m) = (p.len(), q.len());
    let (ps, qs) = (bottom_left(p), bottom_left(q));
    let mut out = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let pi = (ps + i) % n;
        let qj = (qs + j) % m;
        out.push(p[pi] + q[qj]);
        if i == n {
            j += 1;
            continue;
        }
        if j == m {
            i += 1;
            continue;
        }
        let ep = p[(pi + 1) % n] - p[pi];
        let eq = q[(qj + 1) % m] - q[qj];
        let c = ep.cross(eq);
        if c > 0.0 {
            i += 1;
        } else if c < 0.0 {
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    ConvexPolygon::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(h: f64) -> ConvexPolygon {
        ConvexPolygon::new(vec![Vec2::new(-h, -h), Vec2::new(h, -h), Vec2::new(h, h), Vec2::new(-h, h)]).unwrap()
    }

    #[test]
    fn orientation_is_normalized() {
        let cw = ConvexPolygon::new(vec![Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)]).unwrap();
        assert!(cw.area() > 0.0);
    }

    #[test]
    fn collinear_vertices_merge() {
        let p = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let line = ConvexPolygon::new(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)]);
        assert!(matches!(line, Err(GeomError::Degenerate(_))));
        let point = ConvexPolygon::new(vec![Vec2::ZERO; 3]);
        assert!(matches!(point, Err(GeomError::Degenerate(_))));
        let reflex = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(1.0, 0.5),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ]);
        assert_eq!(reflex, Err(GeomError::NotConvex));
    }

    #[test]
    fn squares_sum_to_square() {
        let s = minkowski_sum(&square(1.0), &square(0.5)).unwrap();
        assert_eq!(s.len(), 4);
        for v in s.vertices() {
            assert!((v.x.abs() - 1.5).abs() < 1e-12 && (v.y.abs() - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_square_inflates() {
        let eps = 1e-3;
        let s = minkowski_sum(&square(1.0), &square(eps)).unwrap();
        assert!(s.contains(Vec2::new(1.0 + eps, 1.0 + eps)));
        assert!(!s.contains(Vec2::new(1.0 + 2.0 * eps, 0.0)));
    }

    #[test]
    fn triangle_plus_negation_is_symmetric_hexagon() {
        let t = ConvexPolygon::new(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)]).unwrap();
        let h = minkowski_sum(&t, &t.negated()).unwrap();
        assert_eq!(h.len(), 6);
        assert!(h.contains(Vec2::ZERO));
        for v in h.vertices() {
            assert!(h.vertices().iter().any(|w| (*w + *v).norm() < 1e-12));
        }
    }

    #[test]
    fn containment_transition_is_exact() {
        let sq = square(0.5);
        assert!(sq.contains(Vec2::ZERO));
        assert!(!sq.contains(Vec2::new(5.0, 5.0)));
        assert!(sq.contains(Vec2::new(0.5, 0.5)));
        assert!(sq.contains(Vec2::new(0.2, 0.5)));
        assert!(!sq.contains(Vec2::new(0.2, 0.5 + 1e-12)));
    }

    #[test]
    fn distances() {
        let sq = square(0.5);
        assert_eq!(sq.distance_to(Vec2::new(0.1, 0.1)), 0.0);
        assert!((sq.distance_to(Vec2::new(2.5, 0.0)) - 2.0).abs() < 1e-12);
        let other = square(0.5).transformed(Vec2::new(3.0, 0.0), 0.0);
        assert!((sq.distance_between(&other) - 2.0).abs() < 1e-12);
        let touching = square(0.5).transformed(Vec2::new(1.0, 0.0), 0.0);
        assert!(sq.intersects(&touching));
        assert_eq!(sq.distance_between(&touching), 0.0);
    }
}
