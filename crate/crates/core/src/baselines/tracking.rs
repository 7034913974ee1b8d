//! Controllers that follow a planned trajectory in the full-contact environment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ilqr::{ilqr_solve, IlqrProblem, IlqrSettings, IlqrSolution, Matrix, Vector};
use crate::env::{decode_observation, twist_to_action, EnvConfig, Layout, RearrangeEnv};
use crate::error::{IlqrError, PlanError};
use crate::geometry::{angle_diff, SE2Pose, Twist2};
use crate::physics::{self, ModelKind, PhysicsParams, WorldState};
use crate::planner::PlannedTrajectory;
use crate::trainer::{run_episode, Controller};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    OpenLoop,
    VelocityFeedback,
    Ilqr,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [
        ControllerKind::OpenLoop,
        ControllerKind::VelocityFeedback,
        ControllerKind::Ilqr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::OpenLoop => "open_loop",
            ControllerKind::VelocityFeedback => "velocity_feedback",
            ControllerKind::Ilqr => "ilqr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackingConfig {
    /// Proportional gain (1/s) on robot pose error for velocity feedback.
    pub velocity_gain: f64,
    pub target_weight: f64,
    pub robot_weight: f64,
    pub control_weight: f64,
    /// Terminal state weights are the running weights times this factor.
    pub terminal_scale: f64,
    pub max_iterations: usize,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            velocity_gain: 1.0,
            target_weight: 10.0,
            robot_weight: 1.0,
            control_weight: 0.1,
            terminal_scale: 100.0,
            max_iterations: 200,
        }
    }
}

/// Per-control-period reference: `states.len() == controls.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub states: Vec<WorldState>,
    pub controls: Vec<Twist2>,
}

impl Reference {
    /// Densifies `traj` by replaying it under its own model with `params`.
    pub fn from_trajectory(
        traj: &PlannedTrajectory,
        layout: &Layout,
        params: &PhysicsParams,
    ) -> Result<Self, PlanError> {
        Ok(Self {
            states: traj.dense_states(&layout.scene, params)?,
            controls: traj.step_controls(),
        })
    }

    pub fn steps(&self) -> usize {
        self.controls.len()
    }
}

/// Replays the reference controls, then holds still.
#[derive(Debug, Clone)]
pub struct OpenLoop {
    pub controls: Vec<Twist2>,
    pub limits: Twist2,
}

impl Controller for OpenLoop {
    fn act(&mut self, _obs: &[f64], _goal: &[f64], step: usize) -> Vec<f64> {
        let u = self.controls.get(step).copied().unwrap_or_default();
        twist_to_action(&u, &self.limits).to_vec()
    }
}

/// Reference controls plus a proportional pull toward the reference robot pose.
#[derive(Debug, Clone)]
pub struct VelocityFeedback {
    pub reference: Reference,
    pub gain: f64,
    pub limits: Twist2,
}

impl Controller for VelocityFeedback {
    fn act(&mut self, obs: &[f64], _goal: &[f64], step: usize) -> Vec<f64> {
        let robot = decode_observation(obs)[0];
        let i = step.min(self.reference.steps());
        let want = self.reference.states[i].robot_pose;
        let ff = self.reference.controls.get(step).copied().unwrap_or_default();
        let u = Twist2::new(
            ff.vx + self.gain * (want.x - robot.x),
            ff.vy + self.gain * (want.y - robot.y),
            ff.omega + self.gain * angle_diff(want.theta, robot.theta),
        );
        twist_to_action(&u, &self.limits).to_vec()
    }
}

/// Pose vector `[robot, objects…]` as `(x, y, θ)` triples.
pub fn pose_vector(poses: impl IntoIterator<Item = SE2Pose>) -> Vector {
    Vector::from_vec(poses.into_iter().flat_map(|p| [p.x, p.y, p.theta]).collect())
}

/// Tracking state: robot pose, object poses, then object twists.
pub fn state_vector(s: &WorldState) -> Vector {
    let mut v: Vec<f64> = std::iter::once(s.robot_pose)
        .chain(s.object_poses.iter().copied())
        .flat_map(|p| [p.x, p.y, p.theta])
        .collect();
    v.extend(s.object_twists.iter().flat_map(|t| [t.vx, t.vy, t.omega]));
    Vector::from_vec(v)
}

/// Inverse of [`state_vector`]; the robot twist is zero.
pub fn state_from_vector(x: &Vector) -> WorldState {
    let m = (x.len() - 3) / 6;
    let c = x.as_slice();
    let pose = |i: usize| SE2Pose::new(c[3 * i], c[3 * i + 1], c[3 * i + 2]);
    let mut s = WorldState::at_rest(pose(0), (1..=m).map(pose).collect());
    for (k, t) in s.object_twists.iter_mut().enumerate() {
        let o = 3 * (1 + m) + 3 * k;
        *t = Twist2::new(c[o], c[o + 1], c[o + 2]);
    }
    s
}

/// `x − r` with pose angles wrapped; twist entries are plain differences.
pub fn state_error(x: &Vector, r: &Vector) -> Vector {
    let poses = 3 * (1 + (x.len() - 3) / 6);
    let mut e = x - r;
    for i in (2..poses).step_by(3) {
        e[i] = angle_diff(x[i], r[i]);
    }
    e
}

/// Affine feedback around an iLQR solution of the full-contact model.
///
/// Only poses are observed, so twist deviations from the nominal are taken
/// as zero.
#[derive(Debug, Clone)]
pub struct IlqrTracker {
    pub solution: IlqrSolution,
    pub limits: Twist2,
}

impl Controller for IlqrTracker {
    fn act(&mut self, obs: &[f64], _goal: &[f64], step: usize) -> Vec<f64> {
        if step >= self.solution.controls.len() {
            return vec![0.0; 3];
        }
        let nominal = &self.solution.states[step];
        let poses = pose_vector(decode_observation(obs));
        let mut dx = Vector::zeros(nominal.len());
        for i in 0..poses.len() {
            dx[i] = if i % 3 == 2 {
                angle_diff(poses[i], nominal[i])
            } else {
                poses[i] - nominal[i]
            };
        }
        let u = self.solution.control(step, &dx);
        twist_to_action(&Twist2::new(u[0], u[1], u[2]), &self.limits).to_vec()
    }
}

/// Solves the tracking problem around `reference` under the nominal
/// full-contact model. Controls are twists in SI units.
pub fn ilqr_track_solve(
    reference: &Reference,
    layout: &Layout,
    env: &EnvConfig,
    cfg: &TrackingConfig,
) -> Result<IlqrSolution, IlqrError> {
    let scene = &layout.scene;
    let params = &env.nominal;
    let limits = env.action_limits;
    let dt = env.dt;
    let dynamics = |x: &Vector, u: &Vector| -> Vector {
        let s = state_from_vector(x);
        let twist = Twist2::new(u[0], u[1], u[2]).clamped(&limits);
        match physics::step(ModelKind::Dynamic, scene, &s, &twist, dt, params) {
            Ok(next) => state_vector(&next),
            Err(_) => x.clone(),
        }
    };
    let m = scene.num_objects();
    let n = 3 + 6 * m;
    let mut qd = vec![0.0; n];
    qd[..3].fill(cfg.robot_weight);
    let t = 3 * (1 + scene.target);
    qd[t] = cfg.target_weight;
    qd[t + 1] = cfg.target_weight;
    let q = Matrix::from_diagonal(&Vector::from_vec(qd));
    let u_ref: Vec<Vector> = reference
        .controls
        .iter()
        .map(|u| {
            let u = u.clamped(&limits);
            Vector::from_row_slice(&[u.vx, u.vy, u.omega])
        })
        .collect();
    let x_ref: Vec<Vector> = reference
        .states
        .iter()
        .map(|s| state_vector(&WorldState::at_rest(s.robot_pose, s.object_poses.clone())))
        .collect();
    let problem = IlqrProblem {
        dynamics: &dynamics,
        error: &state_error,
        qf: &q * cfg.terminal_scale,
        q,
        r: Matrix::identity(3, 3) * cfg.control_weight,
        x0: x_ref[0].clone(),
        x_ref,
        u_init: u_ref.clone(),
        u_ref,
    };
    let settings = IlqrSettings {
        max_iterations: cfg.max_iterations,
        ..IlqrSettings::default()
    };
    ilqr_solve(&problem, &settings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingResult {
    pub kind: ControllerKind,
    pub trials: usize,
    pub successes: usize,
}

impl TrackingResult {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Runs `controller` for `trials` episodes from the reference start. Episodes
/// last at least as long as the reference.
pub fn tracking_trials<C: Controller + ?Sized, R: Rng + ?Sized>(
    kind: ControllerKind,
    controller: &mut C,
    reference: &Reference,
    layout: &Layout,
    env: &EnvConfig,
    trials: usize,
    rng: &mut R,
) -> Result<TrackingResult, crate::error::EnvError> {
    let cfg = EnvConfig {
        episode_len: env.episode_len.max(reference.steps()),
        ..env.clone()
    };
    let mut e = RearrangeEnv::new(layout.clone(), cfg)?;
    let successes = (0..trials)
        .filter(|_| run_episode(&mut e, controller, Some(&reference.states[0]), rng))
        .count();
    Ok(TrackingResult {
        kind,
        trials,
        successes,
    })
}
