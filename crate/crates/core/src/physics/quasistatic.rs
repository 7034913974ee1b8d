//! Quasi-static pushing: objects move only while pushed, with the twist
//! selected by the limit surface and the Coulomb cone at the contacts.

use std::collections::VecDeque;

use arrayvec::ArrayVec;
use nalgebra::{DMatrix, DVector, Vector3};

use super::{
    substep_count, LimitSurface, PhysicsParams, Scene, WorldState,
};
use crate::error::{PhysicsError, RejectReason};
use crate::geometry::{
    bounding_overlap, contact_query, cross, ConvexShape, SE2Pose, Twist2, Vec2, FREE_TOLERANCE,
};

/// Largest sweep of the robot's outermost point per sub-step, in meters.
pub(crate) const MAX_SUBSTEP_DISP: f64 = 2e-3;

/// Overlap below which a push is not resolved.
const PUSH_EPS: f64 = 1e-12;

/// A contact point seen by a pushed object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushContact {
    pub point: Vec2,
    /// Unit normal pointing from the pusher into the object.
    pub normal: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Separate,
    Stick,
    /// Sliding with friction force along `+t` (sign `+1`) or `−t` (`−1`).
    Slide(i8),
}

#[inline]
fn tangent(n: &Vec2) -> Vec2 {
    Vec2::new(-n.y, n.x)
}

fn wrench_of(r: &Vec2, f: &Vec2) -> Vector3<f64> {
    Vector3::new(f.x, f.y, cross(r, f))
}

/// True when `w` is a nonnegative combination of `gens` (within tolerance).
fn cone_contains(gens: &[Vector3<f64>], w: &Vector3<f64>) -> bool {
    let scale = w.norm().max(1e-300);
    let tol = 1e-9 * scale;
    let k = gens.len();
    for mask in 1u32..(1 << k) {
        let idx: ArrayVec<usize, 4> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if idx.len() > 3 {
            continue;
        }
        let g = DMatrix::from_fn(3, idx.len(), |r, c| gens[idx[c]][r]);
        let gtg = g.transpose() * &g;
        let Some(chol) = gtg.clone().cholesky() else {
            continue;
        };
        let coeffs = chol.solve(&(g.transpose() * DVector::from_column_slice(w.as_slice())));
        if coeffs.iter().any(|&c| c < -1e-12) {
            continue;
        }
        let resid = &g * &coeffs - DVector::from_column_slice(w.as_slice());
        if resid.norm() <= tol {
            return true;
        }
    }
    false
}

/// Twist of a quasi-statically pushed object.
///
/// `pusher_twist` is expressed about `pusher_center` and the result about
/// `object_center`, both with world-frame axes. With two contacts the
/// object first tries to move rigidly with the pusher (both points
/// sticking); otherwise every combination of separating, sticking, and
/// sliding contact modes is solved and the first consistent one is used.
pub fn pushed_twist(
    ls: &LimitSurface,
    object_center: Vec2,
    contacts: &[PushContact],
    pusher_twist: &Twist2,
    pusher_center: Vec2,
    mu: f64,
) -> Twist2 {
    let mut pts: ArrayVec<PushContact, 2> = ArrayVec::new();
    for c in contacts {
        if pts.is_full() {
            break;
        }
        if pts.iter().all(|p| (p.point - c.point).norm() > 1e-9) {
            pts.push(*c);
        }
    }
    if pts.is_empty() {
        return Twist2::ZERO;
    }
    let r: ArrayVec<Vec2, 2> = pts.iter().map(|c| c.point - object_center).collect();
    let u: ArrayVec<Vec2, 2> = pts
        .iter()
        .map(|c| pusher_twist.point_velocity(&(c.point - pusher_center)))
        .collect();
    let speed = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let eps = 1e-9 * speed + 1e-15;
    if pts.iter().zip(&u).all(|(c, ui)| c.normal.dot(ui) <= eps) {
        return Twist2::ZERO;
    }

    if pts.len() == 2 {
        let rigid = pusher_twist.shifted(&(object_center - pusher_center));
        let w = ls.wrench_for_twist(&rigid);
        let gens: ArrayVec<Vector3<f64>, 4> = pts
            .iter()
            .zip(&r)
            .flat_map(|(c, ri)| {
                let t = tangent(&c.normal);
                [
                    wrench_of(ri, &(c.normal + t * mu)),
                    wrench_of(ri, &(c.normal - t * mu)),
                ]
            })
            .collect();
        if cone_contains(&gens, &w) {
            return rigid;
        }
    }

    let choices = [Mode::Stick, Mode::Slide(1), Mode::Slide(-1), Mode::Separate];
    let mut modes: Vec<ArrayVec<Mode, 2>> = Vec::new();
    if pts.len() == 1 {
        for m in &choices[..3] {
            modes.push([*m].into_iter().collect());
        }
    } else {
        for a in &choices {
            for b in &choices {
                let both_stick = *a == Mode::Stick && *b == Mode::Stick;
                let none = *a == Mode::Separate && *b == Mode::Separate;
                if !both_stick && !none {
                    modes.push([*a, *b].into_iter().collect());
                }
            }
        }
        let active = |m: &ArrayVec<Mode, 2>| m.iter().filter(|x| **x != Mode::Separate).count();
        let sticks = |m: &ArrayVec<Mode, 2>| m.iter().filter(|x| **x == Mode::Stick).count();
        modes.sort_by_key(|m| (std::cmp::Reverse(active(m)), std::cmp::Reverse(sticks(m))));
    }

    for mode in &modes {
        if let Some(v) = solve_mode(ls, &pts, &r, &u, mode, mu, eps) {
            return v;
        }
    }

    // Numerical corner case: translate along the mean normal.
    let n = pts
        .iter()
        .map(|c| c.normal)
        .fold(Vec2::zeros(), |a, b| a + b)
        .normalize();
    let approach = pts
        .iter()
        .zip(&u)
        .map(|(c, ui)| c.normal.dot(ui))
        .fold(0.0, f64::max);
    Twist2::new(n.x * approach, n.y * approach, 0.0)
}

fn solve_mode(
    ls: &LimitSurface,
    pts: &[PushContact],
    r: &[Vec2],
    u: &[Vec2],
    mode: &[Mode],
    mu: f64,
    eps: f64,
) -> Option<Twist2> {
    let n_force: usize = mode
        .iter()
        .map(|m| match m {
            Mode::Stick => 2,
            Mode::Slide(_) => 1,
            Mode::Separate => 0,
        })
        .sum();
    let dim = 3 + n_force;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DVector::<f64>::zeros(dim);
    let c2 = ls.moment_ratio_sq();
    a[(0, 0)] = -1.0;
    a[(1, 1)] = -1.0;
    a[(2, 2)] = -c2;
    let mut col = 3;
    let mut row = 3;
    for (i, m) in mode.iter().enumerate() {
        let n = pts[i].normal;
        let t = tangent(&n);
        let ri = r[i];
        let force_col = |dir: Vec2, col: usize, a: &mut DMatrix<f64>| {
            a[(0, col)] = dir.x;
            a[(1, col)] = dir.y;
            a[(2, col)] = cross(&ri, &dir);
        };
        match *m {
            Mode::Separate => {}
            Mode::Stick => {
                force_col(n, col, &mut a);
                force_col(t, col + 1, &mut a);
                col += 2;
                // v + ω × r = u
                a[(row, 0)] = 1.0;
                a[(row, 2)] = -ri.y;
                b[row] = u[i].x;
                a[(row + 1, 1)] = 1.0;
                a[(row + 1, 2)] = ri.x;
                b[row + 1] = u[i].y;
                row += 2;
            }
            Mode::Slide(s) => {
                force_col(n + t * (mu * s as f64), col, &mut a);
                col += 1;
                a[(row, 0)] = n.x;
                a[(row, 1)] = n.y;
                a[(row, 2)] = -n.x * ri.y + n.y * ri.x;
                b[row] = n.dot(&u[i]);
                row += 1;
            }
        }
    }
    let z = a.lu().solve(&b)?;
    if !z.iter().all(|v| v.is_finite()) {
        return None;
    }
    let v = Twist2::new(z[0], z[1], z[2]);
    let feps = 1e-9 * (v.linear().norm() + c2.sqrt() * v.omega.abs()) + 1e-15;
    let mut col = 3;
    let mut any_force = false;
    for (i, m) in mode.iter().enumerate() {
        let n = pts[i].normal;
        let vo = v.point_velocity(&r[i]);
        match *m {
            Mode::Separate => {
                if n.dot(&vo) < n.dot(&u[i]) - eps {
                    return None;
                }
            }
            Mode::Stick => {
                let (fn_, ft) = (z[col], z[col + 1]);
                col += 2;
                if fn_ < -feps || ft.abs() > mu * fn_ + feps {
                    return None;
                }
                any_force |= fn_ > feps;
            }
            Mode::Slide(s) => {
                let fn_ = z[col];
                col += 1;
                if fn_ < -feps {
                    return None;
                }
                let slip = tangent(&n).dot(&(u[i] - vo));
                if (s as f64) * slip < -eps {
                    return None;
                }
                any_force |= fn_ > feps;
            }
        }
    }
    any_force.then_some(v)
}

/// An entity pushing movable objects during one sub-step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PushSource {
    pub shape: ConvexShape,
    pub pose: SE2Pose,
    /// About `pose`'s origin.
    pub twist: Twist2,
    pub friction: f64,
    /// Object index when the source is itself a movable object.
    pub object: Option<usize>,
}

/// Resolves robot/object pushes for one sub-step of length `h`.
///
/// Each moved object becomes a pusher in turn; an object revisited more
/// than `m + 1` times signals a cycle and rejects the step.
pub(crate) fn propagate_pushes(
    scene: &Scene,
    params: &PhysicsParams,
    poses: &mut [SE2Pose],
    sources: &[PushSource],
    h: f64,
    immovable: &[bool],
) -> Result<(), RejectReason> {
    let m = poses.len();
    let mut visits = vec![0usize; m];
    let mut queue: VecDeque<PushSource> = sources.iter().copied().collect();
    while let Some(src) = queue.pop_front() {
        for j in 0..m {
            if immovable[j] || src.object == Some(j) {
                continue;
            }
            let shape = &scene.objects[j];
            if !bounding_overlap(&src.shape, &src.pose, shape, &poses[j], 0.0) {
                continue;
            }
            let Some(manifold) = contact_query(&src.shape, &src.pose, shape, &poses[j]) else {
                continue;
            };
            if manifold.max_penetration() <= PUSH_EPS {
                continue;
            }
            visits[j] += 1;
            if visits[j] > m + 1 {
                return Err(RejectReason::PushCycle(j));
            }
            let ls = LimitSurface::for_object(
                params.mass[j],
                params.friction_table[j],
                params.pressure_moment_const,
            );
            let center = poses[j].position();
            let contacts: ArrayVec<PushContact, 2> = manifold
                .points
                .iter()
                .map(|p| PushContact {
                    point: p.position,
                    normal: p.normal,
                })
                .collect();
            let v = pushed_twist(
                &ls,
                center,
                &contacts,
                &src.twist,
                src.pose.position(),
                src.friction,
            );
            let mut tau: f64 = 0.0;
            for p in manifold.points.iter().filter(|p| p.penetration > 0.0) {
                let rate = p.normal.dot(&v.point_velocity(&(p.position - center)));
                if rate > 1e-12 {
                    tau = tau.max(p.penetration / rate);
                }
            }
            let tau = tau.min(10.0 * h);
            poses[j] = poses[j].advanced(&v, tau);
            for _ in 0..4 {
                match contact_query(&src.shape, &src.pose, shape, &poses[j]) {
                    Some(mf) if mf.max_penetration() > PUSH_EPS => {
                        let d = mf.normal() * mf.max_penetration();
                        poses[j] = SE2Pose::new(poses[j].x + d.x, poses[j].y + d.y, poses[j].theta);
                    }
                    _ => break,
                }
            }
            let scale = if h > 0.0 { tau / h } else { 0.0 };
            queue.push_back(PushSource {
                shape: *shape,
                pose: poses[j],
                twist: v.scaled(scale),
                friction: params.friction_contact.object_object,
                object: Some(j),
            });
        }
    }
    Ok(())
}

pub(crate) fn robot_source(scene: &Scene, pose: SE2Pose, u: &Twist2, params: &PhysicsParams) -> PushSource {
    PushSource {
        shape: scene.robot,
        pose,
        twist: *u,
        friction: params.friction_contact.robot_object,
        object: None,
    }
}

/// Rejects the step if the robot overlaps an obstacle.
pub(crate) fn check_robot_obstacles(scene: &Scene, robot: &SE2Pose) -> Result<(), RejectReason> {
    for (k, (sh, pose)) in scene.obstacles.iter().enumerate() {
        if !bounding_overlap(&scene.robot, robot, sh, pose, 0.0) {
            continue;
        }
        if let Some(m) = contact_query(&scene.robot, robot, sh, pose) {
            if m.max_penetration() > FREE_TOLERANCE {
                return Err(RejectReason::Penetration(0, scene.obstacle_id(k), m.max_penetration()));
            }
        }
    }
    Ok(())
}

/// Robot pose after `k` of `n` sub-steps; the last one lands exactly on `start + u·dt`.
#[inline]
pub(crate) fn robot_at(start: &SE2Pose, u: &Twist2, dt: f64, k: usize, n: usize) -> SE2Pose {
    let t = if k == n { dt } else { dt * k as f64 / n as f64 };
    start.advanced(u, t)
}

/// Advances the scene with quasi-static pushing; returned objects are at rest.
pub fn step_quasistatic(
    scene: &Scene,
    state: &WorldState,
    u: &Twist2,
    dt: f64,
    params: &PhysicsParams,
) -> Result<WorldState, PhysicsError> {
    if !(dt > 0.0) {
        return Err(PhysicsError::NonPositiveDt(dt));
    }
    let mut next = state.clone();
    next.robot_twist = *u;
    next.object_twists.iter_mut().for_each(|t| *t = Twist2::ZERO);
    if u.is_zero() {
        return Ok(next);
    }
    let n = substep_count(&scene.robot, u, dt, MAX_SUBSTEP_DISP);
    let h = dt / n as f64;
    let immovable = vec![false; scene.num_objects()];
    for k in 1..=n {
        next.robot_pose = robot_at(&state.robot_pose, u, dt, k, n);
        check_robot_obstacles(scene, &next.robot_pose).map_err(PhysicsError::Rejected)?;
        let src = robot_source(scene, next.robot_pose, u, params);
        propagate_pushes(scene, params, &mut next.object_poses, &[src], h, &immovable)
            .map_err(PhysicsError::Rejected)?;
    }
    scene
        .check_free(&next, FREE_TOLERANCE)
        .map_err(PhysicsError::Rejected)?;
    Ok(next)
}
