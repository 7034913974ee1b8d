use super::pose::{angle_diff, SE2Pose};
use crate::error::GeometryError;

/// Default length that converts radians into meters in the C-state metric.
pub const DEFAULT_ANGLE_SCALE: f64 = 0.04;

/// Weighted product-space distance between two C-states.
///
/// Each entity contributes `w · (‖Δp‖ + angle_scale · |Δθ|)`, with the
/// angle compared along the shortest arc.
pub fn cstate_distance(
    q1: &[SE2Pose],
    q2: &[SE2Pose],
    weights: &[f64],
    angle_scale: f64,
) -> Result<f64, GeometryError> {
    if q1.len() != q2.len() || q1.len() != weights.len() {
        return Err(GeometryError::LengthMismatch {
            left: q1.len(),
            right: q2.len(),
            weights: weights.len(),
        });
    }
    Ok(q1
        .iter()
        .zip(q2)
        .zip(weights)
        .map(|((a, b), w)| {
            let dp = (a.x - b.x).hypot(a.y - b.y);
            w * (dp + angle_scale * angle_diff(a.theta, b.theta).abs())
        })
        .sum())
}
