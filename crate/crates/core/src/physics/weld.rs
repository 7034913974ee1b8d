//! Weld model: the target sticks rigidly to the robot from its first contact.

use super::quasistatic::{check_robot_obstacles, propagate_pushes, robot_at, robot_source, PushSource, MAX_SUBSTEP_DISP};
use super::{substep_count, Attachment, PhysicsParams, Scene, WorldState};
use crate::error::PhysicsError;
use crate::geometry::{contact_query, Twist2, FREE_TOLERANCE};

fn touching(scene: &Scene, state: &WorldState) -> bool {
    let t = scene.target;
    contact_query(
        &scene.robot,
        &state.robot_pose,
        &scene.objects[t],
        &state.object_poses[t],
    )
    .is_some()
}

fn attach(scene: &Scene, state: &mut WorldState) {
    let t = scene.target;
    state.attachment = Some(Attachment {
        object: t,
        relative: state.robot_pose.inverse().compose(&state.object_poses[t]),
    });
}

/// Advances the scene under the Weld model.
///
/// Before attachment the target cannot be moved by other objects; the
/// robot pushes it quasi-statically only within the sub-step where contact
/// first occurs, after which it is carried rigidly and pushes others.
pub fn step_weld(
    scene: &Scene,
    state: &WorldState,
    u: &Twist2,
    dt: f64,
    params: &PhysicsParams,
) -> Result<WorldState, PhysicsError> {
    if !(dt > 0.0) {
        return Err(PhysicsError::NonPositiveDt(dt));
    }
    let t = scene.target;
    let mut next = state.clone();
    next.robot_twist = *u;
    next.object_twists.iter_mut().for_each(|w| *w = Twist2::ZERO);
    if next.attachment.is_none() && touching(scene, &next) {
        attach(scene, &mut next);
    }
    if u.is_zero() {
        return Ok(next);
    }
    let m = scene.num_objects();
    let n = substep_count(&scene.robot, u, dt, MAX_SUBSTEP_DISP);
    let h = dt / n as f64;
    let mut only_target = vec![true; m];
    only_target[t] = false;
    let mut all_but_target = vec![false; m];
    all_but_target[t] = true;
    for k in 1..=n {
        next.robot_pose = robot_at(&state.robot_pose, u, dt, k, n);
        check_robot_obstacles(scene, &next.robot_pose).map_err(PhysicsError::Rejected)?;
        let robot = robot_source(scene, next.robot_pose, u, params);
        if next.attachment.is_none() {
            propagate_pushes(scene, params, &mut next.object_poses, &[robot], h, &only_target)
                .map_err(PhysicsError::Rejected)?;
            if touching(scene, &next) {
                attach(scene, &mut next);
            }
        }
        let mut sources = vec![robot];
        if let Some(a) = next.attachment {
            let pose = next.robot_pose.compose(&a.relative);
            next.object_poses[a.object] = pose;
            sources.push(PushSource {
                shape: scene.objects[a.object],
                pose,
                twist: u.shifted(&(pose.position() - next.robot_pose.position())),
                friction: params.friction_contact.object_object,
                object: Some(a.object),
            });
        }
        propagate_pushes(scene, params, &mut next.object_poses, &sources, h, &all_but_target)
            .map_err(PhysicsError::Rejected)?;
    }
    scene
        .check_free(&next, FREE_TOLERANCE)
        .map_err(PhysicsError::Rejected)?;
    Ok(next)
}
