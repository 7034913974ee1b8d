//! Planar rigid-body math, convex shapes, and contact queries.

mod contact;
mod metric;
mod pose;
mod shape;

pub use contact::{
    bounding_overlap, collide, contact_query, penetration_depth, ContactManifold, ContactPoint,
    CONTACT_EPS, FREE_TOLERANCE,
};
pub use metric::{cstate_distance, DEFAULT_ANGLE_SCALE};
pub use pose::{angle_diff, cross, cross_scalar, normalize_angle, SE2Pose, Twist2, Vec2};
pub use shape::{ConvexShape, EntityClass, ShapeKind};
