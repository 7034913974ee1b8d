//! Cart-pole used for the reset-distribution study.

use serde::{Deserialize, Serialize};

/// Integration step of the equations of motion.
pub const CARTPOLE_DT: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    /// Pole angle from upright, radians.
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.x_dot, self.theta, self.theta_dot]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            x: v[0],
            x_dot: v[1],
            theta: v[2],
            theta_dot: v[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CartPoleParams {
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Distance from pivot to the pole's centre of mass.
    pub half_length: f64,
    pub gravity: f64,
    pub force_limit: f64,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        Self {
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            gravity: 9.8,
            force_limit: 10.0,
        }
    }
}

impl CartPoleParams {
    fn derivative(&self, s: &[f64; 4], force: f64) -> [f64; 4] {
        let total = self.cart_mass + self.pole_mass;
        let (sin, cos) = s[2].sin_cos();
        let pml = self.pole_mass * self.half_length;
        let temp = (force + pml * s[3] * s[3] * sin) / total;
        let theta_acc = (self.gravity * sin - cos * temp)
            / (self.half_length * (4.0 / 3.0 - self.pole_mass * cos * cos / total));
        let x_acc = temp - pml * theta_acc * cos / total;
        [s[1], x_acc, s[3], theta_acc]
    }

    /// Kinetic plus potential energy (uniform rod, no friction).
    pub fn energy(&self, s: &CartPoleState) -> f64 {
        let (mc, mp, l) = (self.cart_mass, self.pole_mass, self.half_length);
        0.5 * (mc + mp) * s.x_dot * s.x_dot
            + mp * l * s.x_dot * s.theta_dot * s.theta.cos()
            + 0.5 * (4.0 / 3.0) * mp * l * l * s.theta_dot * s.theta_dot
            + mp * self.gravity * l * s.theta.cos()
    }
}

/// One RK4 step with the force clamped to the limit.
pub fn cartpole_step(
    params: &CartPoleParams,
    s: &CartPoleState,
    force: f64,
    dt: f64,
) -> CartPoleState {
    let f = force.clamp(-params.force_limit, params.force_limit);
    let y = s.to_array();
    let add = |a: &[f64; 4], b: &[f64; 4], h: f64| std::array::from_fn(|i| a[i] + h * b[i]);
    let k1 = params.derivative(&y, f);
    let k2 = params.derivative(&add(&y, &k1, 0.5 * dt), f);
    let k3 = params.derivative(&add(&y, &k2, 0.5 * dt), f);
    let k4 = params.derivative(&add(&y, &k3, dt), f);
    let out: [f64; 4] =
        std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    CartPoleState::from_slice(&out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CartPoleConfig {
    pub params: CartPoleParams,
    /// Control period; the force is held over `control_dt / CARTPOLE_DT` integration steps.
    pub control_dt: f64,
    pub horizon: usize,
    pub goal_x: f64,
    pub goal_tolerance: f64,
    /// Largest |θ| that counts as upright.
    pub upright_tolerance: f64,
    /// Half-width of the uniform start-angle perturbation.
    pub start_angle_noise: f64,
}

impl Default for CartPoleConfig {
    fn default() -> Self {
        Self {
            params: CartPoleParams::default(),
            control_dt: 0.1,
            horizon: 50,
            goal_x: 1.0,
            goal_tolerance: 0.1,
            upright_tolerance: 0.25,
            start_angle_noise: 0.05,
        }
    }
}

impl CartPoleConfig {
    /// Test-time start: cart at rest at the origin, pole tilted uniformly
    /// within `start_angle_noise`.
    pub fn sample_start<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> CartPoleState {
        let h = self.start_angle_noise;
        CartPoleState {
            theta: if h > 0.0 { rng.random_range(-h..=h) } else { 0.0 },
            ..CartPoleState::default()
        }
    }

    pub fn substeps(&self) -> usize {
        ((self.control_dt / CARTPOLE_DT).round() as usize).max(1)
    }

    /// Holds a normalized action in `[-1, 1]` for one control period.
    pub fn control_step(&self, s: &CartPoleState, action: f64) -> CartPoleState {
        let f = action.clamp(-1.0, 1.0) * self.params.force_limit;
        let h = self.control_dt / self.substeps() as f64;
        (0..self.substeps()).fold(*s, |s, _| cartpole_step(&self.params, &s, f, h))
    }

    /// Goal: the cart position.
    pub fn goal(&self) -> [f64; 1] {
        [self.goal_x]
    }

    /// Achieved quantities `(x, θ)`; the reward needs θ for the upright test.
    pub fn achieved(s: &CartPoleState) -> [f64; 2] {
        [s.x, s.theta]
    }

    /// The goal an achieved `(x, θ)` would satisfy.
    pub fn goal_of(achieved: &[f64]) -> Vec<f64> {
        vec![achieved[0]]
    }

    /// 0 when the cart is within tolerance of `goal` with the pole upright, else −1.
    pub fn reward(&self, achieved: &[f64], goal: &[f64]) -> f64 {
        let at_goal = (achieved[0] - goal[0]).abs() < self.goal_tolerance;
        let upright = achieved[1].abs() < self.upright_tolerance;
        if at_goal && upright {
            0.0
        } else {
            -1.0
        }
    }

    pub fn observe(s: &CartPoleState) -> Vec<f64> {
        let (sin, cos) = s.theta.sin_cos();
        vec![s.x, s.x_dot, sin, cos, s.theta_dot]
    }
}
