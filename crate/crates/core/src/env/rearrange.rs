//! Goal-conditioned rearrangement MDP over a [`Layout`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layout::{Goal, Layout};
use crate::error::EnvError;
use crate::geometry::{SE2Pose, Twist2, FREE_TOLERANCE};
use crate::physics::{self, sample_params, ModelKind, PhysicsParams, WorldState};

/// Control period in seconds (10 Hz).
pub const CONTROL_DT: f64 = 0.1;

pub const ACTION_LIMITS: Twist2 = Twist2::new(0.25, 0.25, 2.5);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObsNoise {
    /// Half-width of the uniform position noise, meters.
    pub pos: f64,
    /// Half-width of the uniform angle noise, radians.
    pub ang: f64,
}

impl ObsNoise {
    pub const NONE: ObsNoise = ObsNoise { pos: 0.0, ang: 0.0 };
}

impl Default for ObsNoise {
    fn default() -> Self {
        Self {
            pos: 0.01,
            ang: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub model: ModelKind,
    pub episode_len: usize,
    pub obs_noise: ObsNoise,
    /// Resample physics parameters at every reset.
    pub randomize: bool,
    /// Standard deviation of the parameter noise as a multiple of the nominal value.
    pub param_spread: f64,
    pub goal_radius: f64,
    pub action_limits: Twist2,
    pub dt: f64,
    pub nominal: PhysicsParams,
}

impl EnvConfig {
    /// Learning-environment defaults: full-contact model with randomized physics.
    pub fn for_layout(layout: &Layout) -> Self {
        Self {
            model: ModelKind::Dynamic,
            episode_len: layout.episode_len,
            obs_noise: ObsNoise::default(),
            randomize: true,
            param_spread: 2.0,
            goal_radius: layout.goal.radius,
            action_limits: ACTION_LIMITS,
            dt: CONTROL_DT,
            nominal: layout.nominal_params(),
        }
    }

    /// Deterministic variant: no noise, nominal physics.
    pub fn deterministic(layout: &Layout, model: ModelKind) -> Self {
        Self {
            model,
            obs_noise: ObsNoise::NONE,
            randomize: false,
            ..Self::for_layout(layout)
        }
    }
}

/// Maps a normalized action in `[-1, 1]³` to a robot twist.
pub fn action_to_twist(action: &[f64], limits: &Twist2) -> Twist2 {
    let c = |v: f64| v.clamp(-1.0, 1.0);
    Twist2::new(
        c(action[0]) * limits.vx,
        c(action[1]) * limits.vy,
        c(action[2]) * limits.omega,
    )
}

/// Inverse of [`action_to_twist`] for twists within the limits.
pub fn twist_to_action(u: &Twist2, limits: &Twist2) -> [f64; 3] {
    let c = |v: f64| v.clamp(-1.0, 1.0);
    [c(u.vx / limits.vx), c(u.vy / limits.vy), c(u.omega / limits.omega)]
}

/// Per entity (robot first): `x, y, sin θ, cos θ`, with uniform noise.
pub fn observe<R: Rng + ?Sized>(state: &WorldState, noise: &ObsNoise, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * (1 + state.object_poses.len()));
    let mut u = |h: f64| if h > 0.0 { rng.random_range(-h..=h) } else { 0.0 };
    for p in std::iter::once(&state.robot_pose).chain(state.object_poses.iter()) {
        let ex = u(noise.pos);
        let ey = u(noise.pos);
        let (s, c) = (p.theta + u(noise.ang)).sin_cos();
        out.extend_from_slice(&[p.x + ex, p.y + ey, s, c]);
    }
    out
}

/// Recovers poses from an observation (exact when noise-free).
pub fn decode_observation(obs: &[f64]) -> Vec<SE2Pose> {
    obs.chunks_exact(4)
        .map(|c| SE2Pose::new(c[0], c[1], c[2].atan2(c[3])))
        .collect()
}

/// Sparse reward: 0 when `achieved` lies strictly inside the goal disc, else −1.
pub fn goal_reward(achieved: &[f64], goal: &[f64], radius: f64) -> f64 {
    if (achieved[0] - goal[0]).hypot(achieved[1] - goal[1]) < radius {
        0.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// Target position after the step.
    pub achieved_goal: [f64; 2],
}

/// One environment instance; the caller supplies the RNG stream.
#[derive(Debug, Clone)]
pub struct RearrangeEnv {
    pub layout: Layout,
    pub config: EnvConfig,
    pub params: PhysicsParams,
    pub state: WorldState,
    pub steps: usize,
}

impl RearrangeEnv {
    pub fn new(layout: Layout, config: EnvConfig) -> Result<Self, EnvError> {
        config
            .nominal
            .validate()
            .map_err(|e| EnvError::Layout(e.to_string()))?;
        if config.nominal.mass.len() != layout.scene.num_objects() {
            return Err(EnvError::ObjectCount {
                expected: layout.scene.num_objects(),
                got: config.nominal.mass.len(),
            });
        }
        Ok(Self {
            params: config.nominal.clone(),
            state: layout.start.clone(),
            steps: 0,
            layout,
            config,
        })
    }

    pub fn goal(&self) -> Goal {
        Goal {
            radius: self.config.goal_radius,
            ..self.layout.goal
        }
    }

    pub fn obs_dim(&self) -> usize {
        4 * (1 + self.layout.scene.num_objects())
    }

    /// Starts an episode from `s0` (or the layout start), resampling physics when randomized.
    pub fn reset<R: Rng + ?Sized>(
        &mut self,
        s0: Option<&WorldState>,
        rng: &mut R,
    ) -> Result<Vec<f64>, EnvError> {
        let s0 = s0.unwrap_or(&self.layout.start);
        let m = self.layout.scene.num_objects();
        if s0.object_poses.len() != m || s0.object_twists.len() != m {
            return Err(EnvError::ObjectCount {
                expected: m,
                got: s0.object_poses.len(),
            });
        }
        self.layout
            .scene
            .check_free(s0, FREE_TOLERANCE)
            .map_err(EnvError::InitialCollision)?;
        self.params = if self.config.randomize {
            sample_params(&self.config.nominal, self.config.param_spread, rng)
        } else {
            self.config.nominal.clone()
        };
        self.state = s0.clone();
        self.steps = 0;
        Ok(observe(&self.state, &self.config.obs_noise, rng))
    }

    pub fn achieved_goal(&self) -> [f64; 2] {
        self.layout.target_position(&self.state)
    }

    pub fn is_success(&self) -> bool {
        goal_reward(&self.achieved_goal(), &self.layout.goal.center(), self.config.goal_radius)
            == 0.0
    }

    /// Applies twist `u` (clamped to the action limits) for one control period.
    ///
    /// Rejected steps of the quasi-static and weld models leave the state unchanged.
    pub fn step<R: Rng + ?Sized>(&mut self, u: &Twist2, rng: &mut R) -> StepOutcome {
        let u = u.clamped(&self.config.action_limits);
        if let Ok(next) = physics::step(
            self.config.model,
            &self.layout.scene,
            &self.state,
            &u,
            self.config.dt,
            &self.params,
        ) {
            self.state = next;
        }
        self.steps += 1;
        let achieved = self.achieved_goal();
        StepOutcome {
            obs: observe(&self.state, &self.config.obs_noise, rng),
            reward: goal_reward(&achieved, &self.layout.goal.center(), self.config.goal_radius),
            done: self.steps >= self.config.episode_len,
            achieved_goal: achieved,
        }
    }

    /// Applies a normalized action in `[-1, 1]³`.
    pub fn step_action<R: Rng + ?Sized>(&mut self, action: &[f64], rng: &mut R) -> StepOutcome {
        let u = action_to_twist(action, &self.config.action_limits);
        self.step(&u, rng)
    }
}

/// Rejection-samples a collision-free state with uniform poses on the table.
///
/// Returns `None` if no free state is found in `max_tries`.
pub fn sample_uniform_state<R: Rng + ?Sized>(
    layout: &Layout,
    rng: &mut R,
    max_tries: usize,
) -> Option<WorldState> {
    let t = layout.scene.table;
    let margin = 0.05;
    let pose = |rng: &mut R| {
        SE2Pose::new(
            rng.random_range(-(t.half_x - margin)..(t.half_x - margin)),
            rng.random_range(-(t.half_y - margin)..(t.half_y - margin)),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        )
    };
    for _ in 0..max_tries {
        let robot = pose(rng);
        let objects = (0..layout.scene.num_objects()).map(|_| pose(rng)).collect();
        let s = WorldState::at_rest(robot, objects);
        if layout.scene.is_free(&s) {
            return Some(s);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn env(id: &str) -> RearrangeEnv {
        let l = Layout::builtin(id).unwrap();
        let c = EnvConfig::deterministic(&l, ModelKind::Dynamic);
        RearrangeEnv::new(l, c).unwrap()
    }

    #[test]
    fn default_reset_uses_layout_start() {
        let mut e = env("1");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs = e.reset(None, &mut rng).unwrap();
        assert_eq!(obs.len(), 16);
        assert_eq!(e.state, e.layout.start);
        assert!(e.state.object_twists.iter().all(|t| t.is_zero()));
    }

    #[test]
    fn reset_from_given_state_round_trips() {
        let mut e = env("1");
        e.config.obs_noise = ObsNoise::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s0 = e.layout.start.clone();
        s0.robot_pose = SE2Pose::new(0.1, -0.35, 0.4);
        s0.object_poses[0] = SE2Pose::new(0.05, -0.1, -0.7);
        let obs = e.reset(Some(&s0), &mut rng).unwrap();
        let decoded = decode_observation(&obs);
        for (d, p) in decoded.iter().zip(s0.poses().iter()) {
            assert!((d.x - p.x).abs() <= 0.01 && (d.y - p.y).abs() <= 0.01);
            assert!(crate::geometry::angle_diff(d.theta, p.theta).abs() <= 0.1 + 1e-12);
        }
    }

    #[test]
    fn overlapping_reset_is_rejected() {
        let mut e = env("1");
        let mut s0 = e.layout.start.clone();
        s0.object_poses[1] = s0.object_poses[0];
        let r = e.reset(Some(&s0), &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(r, Err(EnvError::InitialCollision(_))));
    }

    #[test]
    fn reward_is_goal_indicator() {
        let mut e = env("1");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s0 = e.layout.start.clone();
        s0.object_poses[0] = SE2Pose::new(0.01, 0.31, 0.0);
        e.reset(Some(&s0), &mut rng).unwrap();
        assert_eq!(e.step(&Twist2::ZERO, &mut rng).reward, 0.0);
        e.reset(None, &mut rng).unwrap();
        // Target about 0.55 m from the goal.
        assert_eq!(e.step(&Twist2::ZERO, &mut rng).reward, -1.0);
        assert_eq!(goal_reward(&[0.0, 0.0], &[0.0, 1.0], 0.05), -1.0);
        assert_eq!(goal_reward(&[0.0, 0.0], &[0.05, 0.0], 0.05), -1.0);
    }

    #[test]
    fn oversized_action_is_clamped() {
        let mut e = env("1");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        e.reset(None, &mut rng).unwrap();
        let before = e.state.robot_pose;
        e.step_action(&[4.0, 0.0, 0.0], &mut rng);
        e.step(&Twist2::new(1.0, 0.0, 0.0), &mut rng);
        assert!((e.state.robot_pose.x - before.x - 0.05).abs() < 1e-12);
        assert_eq!(e.state.robot_pose.y, before.y);
    }

    #[test]
    fn episode_ends_after_exact_length() {
        let mut e = env("reduced");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        e.reset(None, &mut rng).unwrap();
        for k in 1..=30 {
            let out = e.step(&Twist2::new(0.0, 0.0, 0.5), &mut rng);
            assert_eq!(out.done, k == 30);
        }
    }

    #[test]
    fn deterministic_without_randomization() {
        let run = || {
            let mut e = env("1");
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            e.reset(None, &mut rng).unwrap();
            let mut obs = vec![];
            for k in 0..30 {
                let a = [((k as f64) * 0.3).sin(), 1.0, ((k as f64) * 0.7).cos()];
                obs.extend(e.step_action(&a, &mut rng).obs);
            }
            obs
        };
        let (a, b) = (run(), run());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn noise_free_observation_is_exact() {
        let l = Layout::builtin("2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs = observe(&l.start, &ObsNoise::NONE, &mut rng);
        let decoded = decode_observation(&obs);
        for (d, p) in decoded.iter().zip(l.start.poses().iter()) {
            assert_eq!((d.x, d.y), (p.x, p.y));
            assert!(d.max_abs_diff(p) < 1e-15);
        }
        for c in obs.chunks_exact(4) {
            assert!((c[2] * c[2] + c[3] * c[3] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_noise_moments() {
        let s = WorldState::at_rest(SE2Pose::identity(), vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| observe(&s, &ObsNoise::default(), &mut rng)[0])
            .collect();
        assert!(xs.iter().all(|x| x.abs() <= 0.01));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 1e-3);
        // Range is actually covered.
        assert!(xs.iter().cloned().fold(f64::MIN, f64::max) > 0.0099);
    }

    #[test]
    fn uniform_states_are_free() {
        let l = Layout::builtin("3").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let s = sample_uniform_state(&l, &mut rng, 1000).unwrap();
            assert!(l.scene.is_free(&s) && l.scene.within_table(&s));
        }
    }
}
