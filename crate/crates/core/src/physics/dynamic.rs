//! Full-contact rigid-body model: kinematic robot, sequential-impulse
//! contacts with Coulomb friction, and Coulomb table friction.

use serde::{Deserialize, Serialize};

use super::quasistatic::robot_at;
use super::{PhysicsParams, Scene, WorldState, GRAVITY, PENETRATION_LIMIT};
use crate::error::PhysicsError;
use crate::geometry::{
    bounding_overlap, collide, contact_query, cross, cross_scalar, ConvexShape, SE2Pose, Twist2,
    Vec2, FREE_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicSettings {
    /// Internal integration step in seconds.
    pub substep: f64,
    pub velocity_iterations: usize,
    /// Fraction of penetration removed per position iteration.
    pub baumgarte: f64,
    pub position_iterations: usize,
    /// Gap below which contacts enter the velocity solve.
    pub speculative_margin: f64,
}

impl Default for DynamicSettings {
    fn default() -> Self {
        Self {
            substep: 0.005,
            velocity_iterations: 10,
            baumgarte: 0.2,
            position_iterations: 30,
            speculative_margin: 0.01,
        }
    }
}

/// Extra full-strength projection passes after the Baumgarte iterations.
const PROJECTION_ITERATIONS: usize = 20;

/// Penetration the position solve aims for.
const POSITION_TARGET: f64 = 0.5 * FREE_TOLERANCE;

#[derive(Debug, Clone, Copy)]
struct Body {
    pose: SE2Pose,
    v: Vec2,
    w: f64,
    inv_mass: f64,
    inv_inertia: f64,
}

#[derive(Debug, Clone, Copy)]
struct Constraint {
    a: usize,
    b: usize,
    normal: Vec2,
    ra: Vec2,
    rb: Vec2,
    separation: f64,
    mu: f64,
    normal_mass: f64,
    tangent_mass: f64,
    lambda_n: f64,
    lambda_t: f64,
}

struct World<'a> {
    scene: &'a Scene,
    shapes: Vec<ConvexShape>,
    bodies: Vec<Body>,
    pairs: Vec<(usize, usize, f64)>,
}

impl World<'_> {
    fn is_static_pair(&self, a: usize, b: usize) -> bool {
        self.bodies[a].inv_mass == 0.0 && self.bodies[b].inv_mass == 0.0
    }

    fn constraints(&self, margin: f64) -> Vec<Constraint> {
        let mut out = Vec::new();
        for &(a, b, mu) in &self.pairs {
            let (ba, bb) = (&self.bodies[a], &self.bodies[b]);
            if !bounding_overlap(&self.shapes[a], &ba.pose, &self.shapes[b], &bb.pose, margin) {
                continue;
            }
            let Some(m) = collide(&self.shapes[a], &ba.pose, &self.shapes[b], &bb.pose, margin)
            else {
                continue;
            };
            for p in &m.points {
                let n = p.normal;
                let t = Vec2::new(-n.y, n.x);
                let ra = p.position - ba.pose.position();
                let rb = p.position - bb.pose.position();
                let k = |d: &Vec2| {
                    ba.inv_mass
                        + bb.inv_mass
                        + ba.inv_inertia * cross(&ra, d).powi(2)
                        + bb.inv_inertia * cross(&rb, d).powi(2)
                };
                out.push(Constraint {
                    a,
                    b,
                    normal: n,
                    ra,
                    rb,
                    separation: p.separation,
                    mu,
                    normal_mass: 1.0 / k(&n),
                    tangent_mass: 1.0 / k(&t),
                    lambda_n: 0.0,
                    lambda_t: 0.0,
                });
            }
        }
        out
    }

    fn relative_velocity(&self, c: &Constraint) -> Vec2 {
        let (ba, bb) = (&self.bodies[c.a], &self.bodies[c.b]);
        (bb.v + cross_scalar(bb.w, &c.rb)) - (ba.v + cross_scalar(ba.w, &c.ra))
    }

    fn apply_impulse(&mut self, c: &Constraint, p: Vec2) {
        let a = &mut self.bodies[c.a];
        a.v -= p * a.inv_mass;
        a.w -= a.inv_inertia * cross(&c.ra, &p);
        let b = &mut self.bodies[c.b];
        b.v += p * b.inv_mass;
        b.w += b.inv_inertia * cross(&c.rb, &p);
    }

    fn solve_velocities(&mut self, cs: &mut [Constraint], h: f64, iterations: usize) {
        for _ in 0..iterations {
            for c in cs.iter_mut() {
                let n = c.normal;
                let t = Vec2::new(-n.y, n.x);

                let vt = self.relative_velocity(c).dot(&t);
                let max_f = c.mu * c.lambda_n;
                let old = c.lambda_t;
                c.lambda_t = (old - vt * c.tangent_mass).clamp(-max_f, max_f);
                let d = c.lambda_t - old;
                self.apply_impulse(c, t * d);

                // Separated contacts may close their gap within the sub-step.
                let target = -c.separation.max(0.0) / h;
                let vn = self.relative_velocity(c).dot(&n);
                let old = c.lambda_n;
                c.lambda_n = (old - (vn - target) * c.normal_mass).max(0.0);
                let d = c.lambda_n - old;
                self.apply_impulse(c, n * d);
            }
        }
    }

    /// Pushes overlapping bodies apart; returns the remaining worst overlap.
    fn solve_positions(&mut self, settings: &DynamicSettings) -> f64 {
        let total = settings.position_iterations + PROJECTION_ITERATIONS;
        let mut worst = 0.0;
        for it in 0..total {
            let beta = if it < settings.position_iterations {
                settings.baumgarte
            } else {
                1.0
            };
            worst = 0.0f64;
            for &(a, b, _) in &self.pairs {
                if self.is_static_pair(a, b) {
                    continue;
                }
                let (pa, pb) = (self.bodies[a].pose, self.bodies[b].pose);
                if !bounding_overlap(&self.shapes[a], &pa, &self.shapes[b], &pb, 0.0) {
                    continue;
                }
                let Some(m) = contact_query(&self.shapes[a], &pa, &self.shapes[b], &pb) else {
                    continue;
                };
                for p in &m.points {
                    worst = worst.max(p.penetration);
                    if p.penetration <= POSITION_TARGET {
                        continue;
                    }
                    let (ba, bb) = (self.bodies[a], self.bodies[b]);
                    let n = p.normal;
                    let ra = p.position - ba.pose.position();
                    let rb = p.position - bb.pose.position();
                    let k = ba.inv_mass
                        + bb.inv_mass
                        + ba.inv_inertia * cross(&ra, &n).powi(2)
                        + bb.inv_inertia * cross(&rb, &n).powi(2);
                    let imp = n * (beta * p.penetration / k);
                    let move_body = |body: &mut Body, r: &Vec2, imp: Vec2| {
                        let d = imp * body.inv_mass;
                        let dth = body.inv_inertia * cross(r, &imp);
                        body.pose = SE2Pose::new(
                            body.pose.x + d.x,
                            body.pose.y + d.y,
                            body.pose.theta + dth,
                        );
                    };
                    move_body(&mut self.bodies[a], &ra, -imp);
                    move_body(&mut self.bodies[b], &rb, imp);
                }
            }
            if worst <= POSITION_TARGET {
                break;
            }
        }
        worst
    }
}

/// Distance covered and final speed for Coulomb deceleration `decel` over `h`.
#[inline]
fn coulomb_slide(speed: f64, decel: f64, h: f64) -> (f64, f64) {
    if speed <= decel * h {
        (speed * speed / (2.0 * decel), 0.0)
    } else {
        ((speed - 0.5 * decel * h) * h, speed - decel * h)
    }
}

fn robot_blocked(scene: &Scene, pose: &SE2Pose) -> bool {
    if !scene.table.contains(pose) {
        return true;
    }
    scene.obstacles.iter().any(|(sh, p)| {
        bounding_overlap(&scene.robot, pose, sh, p, 0.0)
            && contact_query(&scene.robot, pose, sh, p)
                .is_some_and(|m| m.max_penetration() > FREE_TOLERANCE)
    })
}

/// Advances the scene with the full-contact model and default settings.
pub fn step_dynamic(
    scene: &Scene,
    state: &WorldState,
    u: &Twist2,
    dt: f64,
    params: &PhysicsParams,
) -> Result<WorldState, PhysicsError> {
    step_dynamic_with(scene, state, u, dt, params, &DynamicSettings::default())
}

/// Advances the scene with the full-contact model.
///
/// Never rejects: if overlaps cannot be resolved within a sub-step (for
/// example an object wedged between robot and wall) the sub-step is undone
/// and the bodies involved stall.
pub fn step_dynamic_with(
    scene: &Scene,
    state: &WorldState,
    u: &Twist2,
    dt: f64,
    params: &PhysicsParams,
    settings: &DynamicSettings,
) -> Result<WorldState, PhysicsError> {
    if !(dt > 0.0) {
        return Err(PhysicsError::NonPositiveDt(dt));
    }
    let m = scene.num_objects();
    let mut next = state.clone();
    next.robot_twist = *u;
    next.attachment = None;
    if u.is_zero() && state.object_twists.iter().all(|t| t.is_zero()) {
        return Ok(next);
    }

    let mut shapes = Vec::with_capacity(1 + m + scene.obstacles.len());
    let mut bodies = Vec::with_capacity(shapes.capacity());
    shapes.push(scene.robot);
    bodies.push(Body {
        pose: state.robot_pose,
        v: Vec2::zeros(),
        w: 0.0,
        inv_mass: 0.0,
        inv_inertia: 0.0,
    });
    for j in 0..m {
        let mass = params.mass[j];
        let t = state.object_twists[j];
        shapes.push(scene.objects[j]);
        bodies.push(Body {
            pose: state.object_poses[j],
            v: t.linear(),
            w: t.omega,
            inv_mass: 1.0 / mass,
            inv_inertia: 1.0 / scene.objects[j].inertia(mass),
        });
    }
    for (sh, pose) in &scene.obstacles {
        shapes.push(*sh);
        bodies.push(Body {
            pose: *pose,
            v: Vec2::zeros(),
            w: 0.0,
            inv_mass: 0.0,
            inv_inertia: 0.0,
        });
    }
    let fc = params.friction_contact;
    let mut pairs = Vec::new();
    for j in 1..=m {
        pairs.push((0, j, fc.robot_object));
        for i in (j + 1)..=m {
            pairs.push((j, i, fc.object_object));
        }
        for k in 0..scene.obstacles.len() {
            pairs.push((j, 1 + m + k, fc.object_obstacle));
        }
    }
    let mut world = World {
        scene,
        shapes,
        bodies,
        pairs,
    };

    let n = ((dt / settings.substep) - 1e-9).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut robot_pose = state.robot_pose;
    for k in 1..=n {
        let candidate = robot_at(&state.robot_pose, u, dt, k, n);
        let (robot_next, robot_twist) = if robot_blocked(world.scene, &candidate) {
            (robot_pose, Twist2::ZERO)
        } else {
            (candidate, *u)
        };
        let saved: Vec<Body> = world.bodies.clone();
        world.bodies[0].pose = robot_pose;
        world.bodies[0].v = robot_twist.linear();
        world.bodies[0].w = robot_twist.omega;

        // Table friction acts first; its exact sliding distance is kept as an offset.
        let mut offsets = vec![(Vec2::zeros(), 0.0); m];
        for j in 0..m {
            let b = &mut world.bodies[1 + j];
            let mass = params.mass[j];
            let mu = params.friction_table[j];
            let decel = mu * GRAVITY;
            let ang_decel =
                params.pressure_moment_const * mu * mass * GRAVITY * b.inv_inertia;
            let speed = b.v.norm();
            let (dist, speed_after) = if speed > 0.0 {
                coulomb_slide(speed, decel, h)
            } else {
                (0.0, 0.0)
            };
            let dir = if speed > 0.0 { b.v / speed } else { Vec2::zeros() };
            let (turn, spin_after) = coulomb_slide(b.w.abs(), ang_decel, h);
            b.v = dir * speed_after;
            let spin_after = spin_after * b.w.signum();
            offsets[j] = (dir * dist - b.v * h, turn * b.w.signum() - spin_after * h);
            b.w = spin_after;
        }

        let mut cs = world.constraints(settings.speculative_margin);
        world.solve_velocities(&mut cs, h, settings.velocity_iterations);

        for (j, (dp, dth)) in offsets.iter().enumerate() {
            let b = &mut world.bodies[1 + j];
            let p = b.pose;
            b.pose = SE2Pose::new(
                p.x + b.v.x * h + dp.x,
                p.y + b.v.y * h + dp.y,
                p.theta + b.w * h + dth,
            );
        }
        world.bodies[0].pose = robot_next;
        let residual = world.solve_positions(settings);
        if residual > 0.5 * PENETRATION_LIMIT {
            world.bodies = saved;
            for b in world.bodies.iter_mut().skip(1).take(m) {
                b.v = Vec2::zeros();
                b.w = 0.0;
            }
            continue;
        }
        robot_pose = robot_next;
    }

    next.robot_pose = robot_pose;
    for j in 0..m {
        let b = &world.bodies[1 + j];
        next.object_poses[j] = b.pose;
        next.object_twists[j] = Twist2::new(b.v.x, b.v.y, b.w);
    }
    Ok(next)
}
