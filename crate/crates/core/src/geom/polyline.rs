use serde::{Deserialize, Serialize};

use super::{wrap_angle, GeomError, Vec2};

/// A piecewise-linear curve parameterized by arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct Polyline {
    points: Vec<Vec2>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl TryFrom<Vec<Vec2>> for Polyline {
    type Error = GeomError;
    fn try_from(v: Vec<Vec2>) -> Result<Self, Self::Error> {
        Polyline::new(v)
    }
}

impl From<Polyline> for Vec<Vec2> {
    fn from(p: Polyline) -> Self {
        p.points
    }
}

/// Foot of the perpendicular from a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: Vec2,
    pub arclength: f64,
    /// Signed offset of the query point, positive to the left of travel.
    pub lateral: f64,
    pub distance: f64,
}

impl Polyline {
    pub fn new(points: Vec<Vec2>) -> Result<Self, GeomError> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        let mut pts: Vec<Vec2> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last().is_none_or(|q: &Vec2| q.distance(p) > 1e-9) {
                pts.push(p);
            }
        }
        if pts.len() < 2 {
            return Err(GeomError::ShortPolyline);
        }
        let mut cumulative = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in pts.windows(2) {
            acc += w[0].distance(w[1]);
            cumulative.push(acc);
        }
        Ok(Self { points: pts, cumulative })
    }

    /// Circular arc sampled every `step` meters or finer.
    pub fn arc(center: Vec2, radius: f64, start_angle: f64, sweep: f64, step: f64) -> Result<Self, GeomError> {
        let n = ((radius * sweep.abs()) / step).ceil().max(1.0) as usize;
        let pts = (0..=n).map(|i| center + Vec2::from_angle(start_angle + sweep * i as f64 / n as f64) * radius).collect();
        Self::new(pts)
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    pub fn start(&self) -> Vec2 {
        self.points[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.points.last().unwrap()
    }

    fn segment_at(&self, s: f64) -> usize {
        let last = self.points.len() - 2;
        match self.cumulative.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    /// Point at arclength `s`; extrapolates linearly past either end.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let i = self.segment_at(s);
        let a = self.points[i];
        let b = self.points[i + 1];
        let seg = self.cumulative[i + 1] - self.cumulative[i];
        a + (b - a) * ((s - self.cumulative[i]) / seg)
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        let i = self.segment_at(s);
        (self.points[i + 1] - self.points[i]).angle()
    }

    pub fn tangent_at(&self, s: f64) -> Vec2 {
        Vec2::from_angle(self.heading_at(s))
    }

    /// Mean absolute curvature over `[s - half, s + half]`.
    pub fn curvature_at(&self, s: f64, half: f64) -> f64 {
        let a = (s - half).max(0.0);
        let b = (s + half).min(self.length());
        if b - a < 1e-6 {
            return 0.0;
        }
        wrap_angle(self.heading_at(b - 1e-9) - self.heading_at(a)).abs() / (b - a)
    }

    /// Orthogonal projection; ties resolve toward larger arclength.
    pub fn project(&self, q: Vec2) -> Projection {
        let mut best = Projection { point: self.points[0], arclength: 0.0, lateral: 0.0, distance: f64::INFINITY };
        let last = self.points.len() - 2;
        for i in 0..=last {
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let len = self.cumulative[i + 1] - self.cumulative[i];
            let mut t = (q - a).dot(ab) / (len * len);
            // Open ends extend so points beyond the ends project sensibly.
            if i > 0 {
                t = t.max(0.0);
            }
            if i < last {
                t = t.min(1.0);
            }
            let foot = a + ab * t;
            let d = foot.distance(q);
            if d <= best.distance {
                best = Projection {
                    point: foot,
                    arclength: self.cumulative[i] + t * len,
                    lateral: ab.cross(q - a) / len,
                    distance: d,
                };
            }
        }
        best
    }

    /// Polyline shifted `offset` meters to the left of travel.
    pub fn offset(&self, offset: f64) -> Result<Polyline, GeomError> {
        let n = self.points.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let prev = if i > 0 { Some((self.points[i] - self.points[i - 1]).normalized()) } else { None };
            let next = if i + 1 < n { Some((self.points[i + 1] - self.points[i]).normalized()) } else { None };
            let normal = match (prev, next) {
                (Some(p), Some(q)) => {
                    let bis = (p.perp() + q.perp()).normalized();
                    let cos_half = bis.dot(q.perp()).max(0.2);
                    bis * (1.0 / cos_half)
                }
                (Some(p), None) => p.perp(),
                (None, Some(q)) => q.perp(),
                (None, None) => unreachable!(),
            };
            out.push(self.points[i] + normal * offset);
        }
        Polyline::new(out)
    }

    /// Appends `other`, skipping its first point if it coincides with our end.
    pub fn concat(&self, other: &Polyline) -> Result<Polyline, GeomError> {
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        Polyline::new(pts)
    }

    /// Portion between arclengths `a` and `b` (clamped to the curve).
    pub fn slice(&self, a: f64, b: f64) -> Result<Polyline, GeomError> {
        let a = a.clamp(0.0, self.length());
        let b = b.clamp(a, self.length());
        let mut pts = vec![self.point_at(a)];
        for (p, c) in self.points.iter().zip(&self.cumulative) {
            if *c > a && *c < b {
                pts.push(*p);
            }
        }
        pts.push(self.point_at(b));
        Polyline::new(pts)
    }

    /// Uniform resampling at roughly `step` spacing.
    pub fn resampled(&self, step: f64) -> Result<Polyline, GeomError> {
        let n = (self.length() / step).ceil().max(1.0) as usize;
        let l = self.length();
        Polyline::new((0..=n).map(|i| self.point_at(l * i as f64 / n as f64)).collect())
    }

    /// Quadratic Bézier from `p0` to `p2` via control point `c`.
    pub fn bezier(p0: Vec2, c: Vec2, p2: Vec2, samples: usize) -> Result<Polyline, GeomError> {
        let pts = (0..=samples)
            .map(|i| {
                let t = i as f64 / samples as f64;
                p0 * ((1.0 - t) * (1.0 - t)) + c * (2.0 * t * (1.0 - t)) + p2 * (t * t)
            })
            .collect();
        Polyline::new(pts)
    }
}
