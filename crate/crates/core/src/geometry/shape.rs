use serde::{Deserialize, Serialize};

use super::pose::{SE2Pose, Vec2};
use crate::error::GeometryError;

/// Convex planar footprint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Box { half_w: f64, half_h: f64 },
    Disc { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityClass {
    Robot,
    Movable,
    Obstacle,
    TableBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexShape {
    pub kind: ShapeKind,
    pub class: EntityClass,
}

impl ConvexShape {
    pub fn new(kind: ShapeKind, class: EntityClass) -> Result<Self, GeometryError> {
        let ok = match kind {
            ShapeKind::Box { half_w, half_h } => half_w > 0.0 && half_h > 0.0,
            ShapeKind::Disc { radius } => radius > 0.0,
        };
        if !ok || !kind.is_finite() {
            return Err(GeometryError::InvalidExtent(kind));
        }
        Ok(Self { kind, class })
    }

    pub fn rect(half_w: f64, half_h: f64, class: EntityClass) -> Result<Self, GeometryError> {
        Self::new(ShapeKind::Box { half_w, half_h }, class)
    }

    pub fn disc(radius: f64, class: EntityClass) -> Result<Self, GeometryError> {
        Self::new(ShapeKind::Disc { radius }, class)
    }

    /// Point-membership test (boundary included).
    pub fn contains(&self, pose: &SE2Pose, p: &Vec2) -> bool {
        match self.kind {
            ShapeKind::Box { half_w, half_h } => {
                let l = pose.inverse_transform_point(p);
                l.x.abs() <= half_w && l.y.abs() <= half_h
            }
            ShapeKind::Disc { radius } => (p - pose.position()).norm_squared() <= radius * radius,
        }
    }

    /// Radius of the smallest origin-centred circle enclosing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match self.kind {
            ShapeKind::Box { half_w, half_h } => half_w.hypot(half_h),
            ShapeKind::Disc { radius } => radius,
        }
    }

    /// Polar moment of inertia about the centroid for a uniform body of `mass`.
    pub fn inertia(&self, mass: f64) -> f64 {
        match self.kind {
            ShapeKind::Box { half_w, half_h } => {
                mass * (4.0 * half_w * half_w + 4.0 * half_h * half_h) / 12.0
            }
            ShapeKind::Disc { radius } => 0.5 * mass * radius * radius,
        }
    }

    /// World-frame corners in counter-clockwise order (boxes only).
    pub fn corners(&self, pose: &SE2Pose) -> Option<[Vec2; 4]> {
        match self.kind {
            ShapeKind::Box { half_w, half_h } => Some([
                pose.transform_point(&Vec2::new(-half_w, -half_h)),
                pose.transform_point(&Vec2::new(half_w, -half_h)),
                pose.transform_point(&Vec2::new(half_w, half_h)),
                pose.transform_point(&Vec2::new(-half_w, half_h)),
            ]),
            ShapeKind::Disc { .. } => None,
        }
    }

    /// Axis-aligned bounds `(min, max)` at `pose`.
    pub fn aabb(&self, pose: &SE2Pose) -> (Vec2, Vec2) {
        match self.corners(pose) {
            Some(c) => {
                let mut lo = c[0];
                let mut hi = c[0];
                for p in &c[1..] {
                    lo = lo.inf(p);
                    hi = hi.sup(p);
                }
                (lo, hi)
            }
            None => {
                let r = self.bounding_radius();
                let p = pose.position();
                (p - Vec2::new(r, r), p + Vec2::new(r, r))
            }
        }
    }
}

impl ShapeKind {
    fn is_finite(&self) -> bool {
        match *self {
            ShapeKind::Box { half_w, half_h } => half_w.is_finite() && half_h.is_finite(),
            ShapeKind::Disc { radius } => radius.is_finite(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_extents() {
        assert!(ConvexShape::rect(0.0, 0.1, EntityClass::Movable).is_err());
        assert!(ConvexShape::rect(0.1, -0.1, EntityClass::Movable).is_err());
        assert!(ConvexShape::disc(0.0, EntityClass::Movable).is_err());
        assert!(ConvexShape::disc(f64::NAN, EntityClass::Movable).is_err());
        assert!(ConvexShape::rect(0.04, 0.04, EntityClass::Movable).is_ok());
    }

    #[test]
    fn contains_respects_rotation() {
        let s = ConvexShape::rect(0.2, 0.05, EntityClass::Obstacle).unwrap();
        let pose = SE2Pose::new(1.0, 0.0, std::f64::consts::FRAC_PI_2);
        assert!(s.contains(&pose, &Vec2::new(1.0, 0.15)));
        assert!(!s.contains(&pose, &Vec2::new(1.15, 0.0)));
    }
}
