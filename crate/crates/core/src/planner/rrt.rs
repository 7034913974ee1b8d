//! Physics-constrained RRT: a kinodynamic tree whose edges are robot
//! twists propagated through a contact model.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trajectory::{PlannedTrajectory, TRAJECTORY_SCHEMA};
use crate::env::{Goal, Layout, ACTION_LIMITS, CONTROL_DT};
use crate::error::{PhysicsError, PlanError, RejectReason};
use crate::geometry::{angle_diff, SE2Pose, Twist2, DEFAULT_ANGLE_SCALE};
use crate::physics::{self, ModelKind, PhysicsParams, Scene, WorldState};

/// Nearest-neighbour weights per entity role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NnWeights {
    pub target: f64,
    pub robot: f64,
    pub others: f64,
}

impl Default for NnWeights {
    fn default() -> Self {
        Self {
            target: 1.0,
            robot: 0.5,
            others: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub model: ModelKind,
    pub goal_bias: f64,
    /// Candidate controls per extension.
    pub num_controls: usize,
    /// Edge durations are drawn from this range, in whole control periods.
    pub duration_range: (f64, f64),
    pub step_dt: f64,
    pub max_iterations: usize,
    pub nn_weights: NnWeights,
    pub angle_scale: f64,
    pub action_limits: Twist2,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Quasistatic,
            goal_bias: 0.1,
            num_controls: 10,
            duration_range: (0.5, 2.0),
            step_dt: CONTROL_DT,
            max_iterations: 20_000,
            nn_weights: NnWeights::default(),
            angle_scale: DEFAULT_ANGLE_SCALE,
            action_limits: ACTION_LIMITS,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: &str| Err(PlanError::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return bad("goal_bias must lie in [0, 1]");
        }
        let (lo, hi) = self.duration_range;
        if !(self.step_dt > 0.0 && lo > 0.0 && hi >= lo) {
            return bad("durations must satisfy 0 < min <= max and step_dt > 0");
        }
        if self.steps_range().0 == 0 {
            return bad("minimum duration is shorter than one control period");
        }
        let w = &self.nn_weights;
        if [w.target, w.robot, w.others].iter().any(|v| !(*v >= 0.0)) {
            return bad("nearest-neighbour weights must be nonnegative");
        }
        Ok(())
    }

    fn steps_range(&self) -> (usize, usize) {
        let (lo, hi) = self.duration_range;
        (
            (lo / self.step_dt - 1e-9).ceil() as usize,
            (hi / self.step_dt + 1e-9).floor() as usize,
        )
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub state: WorldState,
    pub parent: Option<usize>,
    pub control: Twist2,
    pub duration: f64,
}

#[derive(Debug, Clone)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn new(root: WorldState) -> Self {
        Self {
            nodes: vec![Node {
                state: root,
                parent: None,
                control: Twist2::ZERO,
                duration: 0.0,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Root-to-node path as indices.
    pub fn path_to(&self, mut i: usize) -> Vec<usize> {
        let mut path = vec![i];
        while let Some(p) = self.nodes[i].parent {
            path.push(p);
            i = p;
        }
        path.reverse();
        path
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub iterations: usize,
    pub nodes: usize,
    pub seconds: f64,
}

/// Weighted C-state distance with the configured per-role weights.
///
/// Same value as `cstate_distance` with weights `[robot, target, others…]`,
/// computed without allocating.
pub fn weighted_distance(scene: &Scene, a: &WorldState, b: &WorldState, cfg: &PlannerConfig) -> f64 {
    let d = |p: &SE2Pose, q: &SE2Pose| {
        (p.x - q.x).hypot(p.y - q.y) + cfg.angle_scale * angle_diff(p.theta, q.theta).abs()
    };
    let w = &cfg.nn_weights;
    let mut total = w.robot * d(&a.robot_pose, &b.robot_pose);
    for (j, (p, q)) in a.object_poses.iter().zip(&b.object_poses).enumerate() {
        let wj = if j == scene.target { w.target } else { w.others };
        total += wj * d(p, q);
    }
    total
}

/// Per-entity weights in C-state order (robot first).
pub fn entity_weights(scene: &Scene, w: &NnWeights) -> Vec<f64> {
    let mut v = vec![w.robot];
    v.extend((0..scene.num_objects()).map(|j| if j == scene.target { w.target } else { w.others }));
    v
}

/// Applies `u` for `duration` in control periods of `step_dt`.
///
/// Rejected if any period is rejected by the model or leaves the table.
pub fn propagate(
    scene: &Scene,
    q: &WorldState,
    u: &Twist2,
    duration: f64,
    step_dt: f64,
    model: ModelKind,
    params: &PhysicsParams,
) -> Result<WorldState, PhysicsError> {
    if !(duration > 0.0) {
        return Err(PhysicsError::NonPositiveDt(duration));
    }
    let steps = ((duration / step_dt).round() as usize).max(1);
    let mut s = q.clone();
    for _ in 0..steps {
        s = physics::step(model, scene, &s, u, step_dt, params)?;
        if !scene.within_table(&s) {
            return Err(PhysicsError::Rejected(RejectReason::OffTable));
        }
    }
    Ok(s)
}

fn random_pose<R: Rng + ?Sized>(scene: &Scene, rng: &mut R) -> SE2Pose {
    let t = scene.table;
    SE2Pose::new(
        rng.random_range(-t.half_x..t.half_x),
        rng.random_range(-t.half_y..t.half_y),
        rng.random_range(-PI..PI),
    )
}

/// Uniform random C-state; with probability `goal_bias` the target sits in
/// the goal, which the returned flag reports.
pub fn sample_state<R: Rng + ?Sized>(
    scene: &Scene,
    goal: &Goal,
    goal_bias: f64,
    rng: &mut R,
) -> (WorldState, bool) {
    let robot = random_pose(scene, rng);
    let mut objects: Vec<SE2Pose> = (0..scene.num_objects())
        .map(|_| random_pose(scene, rng))
        .collect();
    let biased = rng.random_bool(goal_bias);
    if biased {
        let t = &mut objects[scene.target];
        *t = SE2Pose::new(goal.x, goal.y, t.theta);
    }
    (WorldState::at_rest(robot, objects), biased)
}

/// Index of the node closest to `q` (first one on ties).
pub fn nearest(tree: &Tree, scene: &Scene, q: &WorldState, cfg: &PlannerConfig) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, n) in tree.nodes.iter().enumerate() {
        let d = weighted_distance(scene, &n.state, q, cfg);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Grows the tree towards `q_rand`; returns the new node index, or `None`
/// when every candidate control was rejected.
///
/// With a `goal`, each candidate is checked after every control period and
/// a candidate whose target enters the goal is cut there and chosen at once.
pub fn extend<R: Rng + ?Sized>(
    tree: &mut Tree,
    scene: &Scene,
    q_rand: &WorldState,
    goal: Option<&Goal>,
    cfg: &PlannerConfig,
    params: &PhysicsParams,
    rng: &mut R,
) -> Option<usize> {
    if cfg.num_controls == 0 || tree.is_empty() {
        return None;
    }
    let near = nearest(tree, scene, q_rand, cfg);
    let from = &tree.nodes[near].state;
    let (lo, hi) = cfg.steps_range();
    let lim = cfg.action_limits;
    let mut best: Option<(f64, WorldState, Twist2, f64)> = None;
    'candidates: for _ in 0..cfg.num_controls {
        let u = Twist2::new(
            rng.random_range(-lim.vx..=lim.vx),
            rng.random_range(-lim.vy..=lim.vy),
            rng.random_range(-lim.omega..=lim.omega),
        );
        let steps = rng.random_range(lo..=hi);
        let mut s = from.clone();
        for k in 1..=steps {
            match physics::step(cfg.model, scene, &s, &u, cfg.step_dt, params) {
                Ok(next) if scene.within_table(&next) => s = next,
                _ => continue 'candidates,
            }
            if goal.is_some_and(|g| in_goal(scene, g, &s)) {
                best = Some((0.0, s, u, k as f64 * cfg.step_dt));
                break 'candidates;
            }
        }
        let d = weighted_distance(scene, &s, q_rand, cfg);
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((d, s, u, steps as f64 * cfg.step_dt));
        }
    }
    let (_, state, control, duration) = best?;
    tree.nodes.push(Node {
        state,
        parent: Some(near),
        control,
        duration,
    });
    Some(tree.len() - 1)
}

fn in_goal(scene: &Scene, goal: &Goal, s: &WorldState) -> bool {
    let p = s.object_poses[scene.target];
    goal.contains([p.x, p.y])
}

/// Plans from `start` until the target enters `goal`.
pub fn plan<R: Rng + ?Sized>(
    layout: &Layout,
    start: &WorldState,
    goal: &Goal,
    cfg: &PlannerConfig,
    params: &PhysicsParams,
    seed: u64,
    rng: &mut R,
) -> Result<(PlannedTrajectory, PlanStats), PlanError> {
    cfg.validate()?;
    let scene = &layout.scene;
    let clock = std::time::Instant::now();
    scene
        .check_free(start, crate::geometry::FREE_TOLERANCE)
        .map_err(PlanError::StartInCollision)?;
    let mut tree = Tree::new(start.clone());
    let finish = |tree: &Tree, leaf: usize, iterations: usize| {
        let path = tree.path_to(leaf);
        let traj = PlannedTrajectory {
            schema: TRAJECTORY_SCHEMA,
            model: cfg.model,
            seed,
            layout: layout.name.clone(),
            goal: *goal,
            step_dt: cfg.step_dt,
            states: path.iter().map(|&i| tree.nodes[i].state.clone()).collect(),
            controls: path[1..].iter().map(|&i| tree.nodes[i].control).collect(),
            durations: path[1..].iter().map(|&i| tree.nodes[i].duration).collect(),
        };
        let stats = PlanStats {
            iterations,
            nodes: tree.len(),
            seconds: clock.elapsed().as_secs_f64(),
        };
        (traj, stats)
    };
    if in_goal(scene, goal, start) {
        return Ok(finish(&tree, 0, 0));
    }
    // Goal samples only constrain the target, so only the target position counts.
    let goal_cfg = PlannerConfig {
        nn_weights: NnWeights {
            target: 1.0,
            robot: 0.0,
            others: 0.0,
        },
        angle_scale: 0.0,
        ..cfg.clone()
    };
    let mut best_distance = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        let (q_rand, biased) = sample_state(scene, goal, cfg.goal_bias, rng);
        let c = if biased { &goal_cfg } else { cfg };
        let Some(i) = extend(&mut tree, scene, &q_rand, Some(goal), c, params, rng) else {
            continue;
        };
        let p = tree.nodes[i].state.object_poses[scene.target];
        best_distance = best_distance.min((p.x - goal.x).hypot(p.y - goal.y));
        if in_goal(scene, goal, &tree.nodes[i].state) {
            return Ok(finish(&tree, i, it));
        }
    }
    Err(PlanError::Exhausted {
        iterations: cfg.max_iterations,
        nodes: tree.len(),
        best_distance,
    })
}

