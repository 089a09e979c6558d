use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{GeomError, Vec2};

/// Triangle area (m²) below which three points are treated as collinear.
pub const COLLINEAR_AREA_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TurnDirection {
    Left,
    Right,
    Straight,
}

impl TurnDirection {
    /// +1 for left (counter-clockwise), -1 for right, 0 for straight.
    pub fn sign(self) -> f64 {
        match self {
            TurnDirection::Left => 1.0,
            TurnDirection::Right => -1.0,
            TurnDirection::Straight => 0.0,
        }
    }
}

/// A circular arc from `start` to `end`, or a straight segment when the
/// defining points are collinear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcOrLine {
    Arc { center: Vec2, radius: f64, direction: TurnDirection, start: Vec2, end: Vec2 },
    Line { start: Vec2, end: Vec2 },
}

/// Circumscribed circle through three points, traversed `p1 → p2 → p3`.
pub fn circle_through(p1: Vec2, p2: Vec2, p3: Vec2) -> Result<ArcOrLine, GeomError> {
    let scale = p1.norm().max(p2.norm()).max(p3.norm()).max(1.0);
    let dup = 1e-12 * scale;
    if p1.distance(p2) <= dup || p2.distance(p3) <= dup || p1.distance(p3) <= dup {
        return Err(GeomError::DuplicatePoints);
    }
    let a = p2 - p1;
    let b = p3 - p1;
    let cross = a.cross(b);
    if 0.5 * cross.abs() < COLLINEAR_AREA_TOL {
        return Ok(ArcOrLine::Line { start: p1, end: p3 });
    }
    // Circumcenter relative to p1.
    let (a2, b2) = (a.norm_sq(), b.norm_sq());
    let d = 2.0 * cross;
    let rel = Vec2::new((b.y * a2 - a.y * b2) / d, (a.x * b2 - b.x * a2) / d);
    let center = p1 + rel;
    let radius = (rel.norm() + (p2 - center).norm() + (p3 - center).norm()) / 3.0;
    let direction = if cross > 0.0 { TurnDirection::Left } else { TurnDirection::Right };
    Ok(ArcOrLine::Arc { center, radius, direction, start: p1, end: p3 })
}

impl ArcOrLine {
    pub fn start(&self) -> Vec2 {
        match *self {
            ArcOrLine::Arc { start, .. } | ArcOrLine::Line { start, .. } => start,
        }
    }

    pub fn end(&self) -> Vec2 {
        match *self {
            ArcOrLine::Arc { end, .. } | ArcOrLine::Line { end, .. } => end,
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match *self {
            ArcOrLine::Arc { radius, .. } => Some(radius),
            ArcOrLine::Line { .. } => None,
        }
    }

    pub fn direction(&self) -> TurnDirection {
        match *self {
            ArcOrLine::Arc { direction, .. } => direction,
            ArcOrLine::Line { .. } => TurnDirection::Straight,
        }
    }

    /// Signed curvature, positive for left turns.
    pub fn curvature(&self) -> f64 {
        match *self {
            ArcOrLine::Arc { radius, direction, .. } => direction.sign() / radius,
            ArcOrLine::Line { .. } => 0.0,
        }
    }

    /// Angle swept travelling from `start` to `end` in the arc's direction,
    /// in `[0, 2π)`. Zero for lines.
    pub fn central_angle(&self) -> f64 {
        match *self {
            ArcOrLine::Arc { center, direction, start, end, .. } => {
                let a0 = (start - center).angle();
                let a1 = (end - center).angle();
                let ccw = (a1 - a0).rem_euclid(TAU);
                match direction {
                    TurnDirection::Left => ccw,
                    _ => (TAU - ccw).rem_euclid(TAU),
                }
            }
            ArcOrLine::Line { .. } => 0.0,
        }
    }

    /// Length from `start` to `end` along the geometry.
    pub fn length(&self) -> f64 {
        match *self {
            ArcOrLine::Arc { radius, .. } => radius * self.central_angle(),
            ArcOrLine::Line { start, end } => start.distance(end),
        }
    }

    /// Point reached after travelling `s` meters from `start`. Continues past
    /// `end` along the circle (or the line's direction).
    pub fn point_at(&self, s: f64) -> Vec2 {
        match *self {
            ArcOrLine::Arc { center, radius, direction, start, .. } => {
                let a0 = (start - center).angle();
                let a = a0 + direction.sign() * s / radius;
                center + Vec2::from_angle(a) * radius
            }
            ArcOrLine::Line { start, end } => start + (end - start).normalized() * s,
        }
    }

    /// Unit tangent at `start` in the direction of travel.
    pub fn start_tangent(&self) -> Vec2 {
        match *self {
            ArcOrLine::Arc { center, direction, start, .. } => (start - center).perp().normalized() * direction.sign(),
            ArcOrLine::Line { start, end } => (end - start).normalized(),
        }
    }
}
