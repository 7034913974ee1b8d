//! Planar contact models that advance a [`WorldState`] under a robot twist.
//!
//! Three interchangeable models share one scene description:
//! * [`ModelKind::Quasistatic`]: limit-surface pushing, objects stop when released.
//! * [`ModelKind::Weld`]: the target is rigidly attached on first contact.
//! * [`ModelKind::Dynamic`]: sequential-impulse rigid bodies with table friction.

mod dynamic;
mod limit_surface;
mod params;
mod quasistatic;
mod weld;

use serde::{Deserialize, Serialize};

use crate::error::{PhysicsError, RejectReason};
use crate::geometry::{
    bounding_overlap, contact_query, ConvexShape, SE2Pose, Twist2, FREE_TOLERANCE,
};

pub use dynamic::{step_dynamic, step_dynamic_with, DynamicSettings};
pub use limit_surface::LimitSurface;
pub use params::{sample_params, ContactFriction, PhysicsParams, NOMINAL_FRICTION, NOMINAL_MASS};
pub use quasistatic::{pushed_twist, step_quasistatic, PushContact};
pub use weld::step_weld;

pub const GRAVITY: f64 = 9.81;

/// Largest overlap accepted after any step.
pub const PENETRATION_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Dynamic,
    Quasistatic,
    Weld,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Dynamic => "dynamic",
            ModelKind::Quasistatic => "quasistatic",
            ModelKind::Weld => "weld",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dynamic" => Ok(ModelKind::Dynamic),
            "quasistatic" | "quasi-static" | "qs" => Ok(ModelKind::Quasistatic),
            "weld" => Ok(ModelKind::Weld),
            other => Err(format!("unknown physics model '{other}'")),
        }
    }
}

/// Axis-aligned table centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableBounds {
    pub half_x: f64,
    pub half_y: f64,
}

impl TableBounds {
    pub fn contains(&self, p: &SE2Pose) -> bool {
        p.x.abs() <= self.half_x && p.y.abs() <= self.half_y
    }
}

/// Static geometry shared by every state of one environment.
///
/// Entity ids: `0` is the robot, `1..=m` the movable objects, and the
/// obstacles follow.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub robot: ConvexShape,
    pub objects: Vec<ConvexShape>,
    pub obstacles: Vec<(ConvexShape, SE2Pose)>,
    pub table: TableBounds,
    /// Index into `objects` of the object that must reach the goal.
    pub target: usize,
}

impl Scene {
    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    #[inline]
    pub fn object_id(j: usize) -> usize {
        j + 1
    }

    #[inline]
    pub fn obstacle_id(&self, k: usize) -> usize {
        1 + self.objects.len() + k
    }

    /// Deepest overlap between any pair of entities, with the offending ids.
    pub fn max_penetration(&self, state: &WorldState) -> (f64, usize, usize) {
        let mut worst = (0.0, 0, 0);
        let mut consider = |d: f64, a: usize, b: usize| {
            if d > worst.0 {
                worst = (d, a, b);
            }
        };
        let m = self.objects.len();
        for (k, (sh, pose)) in self.obstacles.iter().enumerate() {
            consider(pen(&self.robot, &state.robot_pose, sh, pose), 0, self.obstacle_id(k));
        }
        for j in 0..m {
            let (sj, pj) = (&self.objects[j], &state.object_poses[j]);
            consider(pen(&self.robot, &state.robot_pose, sj, pj), 0, j + 1);
            for i in (j + 1)..m {
                consider(pen(sj, pj, &self.objects[i], &state.object_poses[i]), j + 1, i + 1);
            }
            for (k, (sh, pose)) in self.obstacles.iter().enumerate() {
                consider(pen(sj, pj, sh, pose), j + 1, self.obstacle_id(k));
            }
        }
        worst
    }

    /// Collision-free membership test with the given tolerance.
    pub fn check_free(&self, state: &WorldState, tol: f64) -> Result<(), RejectReason> {
        let (d, a, b) = self.max_penetration(state);
        if d > tol {
            Err(RejectReason::Penetration(a, b, d))
        } else {
            Ok(())
        }
    }

    pub fn is_free(&self, state: &WorldState) -> bool {
        self.check_free(state, FREE_TOLERANCE).is_ok()
    }

    /// True when the robot and every object lie inside the table.
    pub fn within_table(&self, state: &WorldState) -> bool {
        self.table.contains(&state.robot_pose)
            && state.object_poses.iter().all(|p| self.table.contains(p))
    }
}

#[inline]
fn pen(a: &ConvexShape, pa: &SE2Pose, b: &ConvexShape, pb: &SE2Pose) -> f64 {
    if !bounding_overlap(a, pa, b, pb, 0.0) {
        return 0.0;
    }
    contact_query(a, pa, b, pb).map_or(0.0, |m| m.max_penetration())
}

/// Rigid attachment of an object to the robot (Weld model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attachment {
    pub object: usize,
    /// `inverse(robot_pose) ∘ object_pose`, frozen at attachment time.
    pub relative: SE2Pose,
}

/// Robot and object poses plus velocities: the MDP state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub robot_pose: SE2Pose,
    pub object_poses: Vec<SE2Pose>,
    pub robot_twist: Twist2,
    pub object_twists: Vec<Twist2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attachment: Option<Attachment>,
}

impl WorldState {
    pub fn at_rest(robot_pose: SE2Pose, object_poses: Vec<SE2Pose>) -> Self {
        let m = object_poses.len();
        Self {
            robot_pose,
            object_poses,
            robot_twist: Twist2::ZERO,
            object_twists: vec![Twist2::ZERO; m],
            attachment: None,
        }
    }

    /// Same configuration with every velocity zeroed and no attachment.
    pub fn lifted_at_rest(&self) -> Self {
        Self::at_rest(self.robot_pose, self.object_poses.clone())
    }

    /// The C-state: robot pose followed by object poses.
    pub fn poses(&self) -> Vec<SE2Pose> {
        let mut v = Vec::with_capacity(1 + self.object_poses.len());
        v.push(self.robot_pose);
        v.extend_from_slice(&self.object_poses);
        v
    }

    pub fn max_pose_diff(&self, other: &WorldState) -> f64 {
        self.poses()
            .iter()
            .zip(other.poses().iter())
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn kinetic_energy(&self, scene: &Scene, params: &PhysicsParams) -> f64 {
        self.object_twists
            .iter()
            .enumerate()
            .map(|(j, t)| {
                let m = params.mass[j];
                let i = scene.objects[j].inertia(m);
                0.5 * m * (t.vx * t.vx + t.vy * t.vy) + 0.5 * i * t.omega * t.omega
            })
            .sum()
    }
}

/// Advances `state` by `dt` seconds under robot twist `u` with the chosen model.
pub fn step(
    model: ModelKind,
    scene: &Scene,
    state: &WorldState,
    u: &Twist2,
    dt: f64,
    params: &PhysicsParams,
) -> Result<WorldState, PhysicsError> {
    match model {
        ModelKind::Quasistatic => step_quasistatic(scene, state, u, dt, params),
        ModelKind::Weld => step_weld(scene, state, u, dt, params),
        ModelKind::Dynamic => step_dynamic(scene, state, u, dt, params),
    }
}

/// Number of sub-steps so the robot's outermost point moves at most `max_disp` per sub-step.
pub(crate) fn substep_count(robot: &ConvexShape, u: &Twist2, dt: f64, max_disp: f64) -> usize {
    let sweep = (u.vx.hypot(u.vy) + u.omega.abs() * robot.bounding_radius()) * dt;
    ((sweep / max_disp).ceil() as usize).max(1)
}

#[cfg(test)]
pub(crate) mod test_scenes {
    use super::*;
    use crate::geometry::EntityClass;

    pub fn cube() -> ConvexShape {
        ConvexShape::rect(0.04, 0.04, EntityClass::Movable).unwrap()
    }

    pub fn robot() -> ConvexShape {
        ConvexShape::rect(0.04, 0.08, EntityClass::Robot).unwrap()
    }

    /// Robot facing +x with its front face touching a single cube.
    pub fn single_push() -> (Scene, WorldState) {
        let scene = Scene {
            robot: robot(),
            objects: vec![cube()],
            obstacles: vec![],
            table: TableBounds {
                half_x: 1.0,
                half_y: 1.0,
            },
            target: 0,
        };
        let state = WorldState::at_rest(
            SE2Pose::new(-0.08, 0.0, 0.0),
            vec![SE2Pose::new(0.0, 0.0, 0.0)],
        );
        (scene, state)
    }

    /// Three cubes, one obstacle wall.
    pub fn cluttered() -> (Scene, WorldState) {
        let scene = Scene {
            robot: robot(),
            objects: vec![cube(), cube(), cube()],
            obstacles: vec![(
                ConvexShape::rect(0.15, 0.04, EntityClass::Obstacle).unwrap(),
                SE2Pose::new(0.3, 0.25, 0.0),
            )],
            table: TableBounds {
                half_x: 0.5,
                half_y: 0.5,
            },
            target: 0,
        };
        let state = WorldState::at_rest(
            SE2Pose::new(0.0, -0.3, 0.0),
            vec![
                SE2Pose::new(0.1, -0.3, 0.0),
                SE2Pose::new(0.2, -0.25, 0.3),
                SE2Pose::new(0.0, 0.1, 0.0),
            ],
        );
        (scene, state)
    }
}
