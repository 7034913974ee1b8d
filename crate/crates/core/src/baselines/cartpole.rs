//! Optimal cart-pole controller defining the oracle state distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ilqr::{euclidean_error, ilqr_solve, IlqrProblem, IlqrSettings, IlqrSolution, Matrix, Vector};
use crate::env::{CartPoleConfig, CartPoleState};
use crate::error::IlqrError;
use crate::trainer::StateGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CartPoleOracleConfig {
    /// Running weights on `(x, ẋ, θ, θ̇)` error from the goal state.
    pub state_weights: [f64; 4],
    /// Weight on the normalized force.
    pub control_weight: f64,
    pub terminal_scale: f64,
}

impl Default for CartPoleOracleConfig {
    fn default() -> Self {
        Self {
            state_weights: [1.0, 0.1, 10.0, 0.1],
            control_weight: 0.1,
            terminal_scale: 100.0,
        }
    }
}

fn to_vector(s: &CartPoleState) -> Vector {
    Vector::from_row_slice(&s.to_array())
}

/// Time-varying affine policy from iLQR toward the goal state.
#[derive(Debug, Clone)]
pub struct CartPoleOracle {
    pub solution: IlqrSolution,
}

impl CartPoleOracle {
    /// Normalized force at step `t`; holds the last gain past the horizon.
    pub fn action(&self, t: usize, s: &CartPoleState) -> f64 {
        let t = t.min(self.solution.controls.len() - 1);
        let dx = to_vector(s) - &self.solution.states[t];
        self.solution.control(t, &dx)[0].clamp(-1.0, 1.0)
    }
}

fn solve(
    env: &CartPoleConfig,
    cfg: &CartPoleOracleConfig,
    start: &CartPoleState,
    u_init: Vec<Vector>,
) -> Result<CartPoleOracle, IlqrError> {
    let dynamics = |x: &Vector, u: &Vector| {
        to_vector(&env.control_step(&CartPoleState::from_slice(x.as_slice()), u[0]))
    };
    let goal = Vector::from_row_slice(&[env.goal_x, 0.0, 0.0, 0.0]);
    let q = Matrix::from_diagonal(&Vector::from_row_slice(&cfg.state_weights));
    let t = env.horizon;
    let problem = IlqrProblem {
        dynamics: &dynamics,
        error: &euclidean_error,
        qf: &q * cfg.terminal_scale,
        q,
        r: Matrix::identity(1, 1) * cfg.control_weight,
        x_ref: vec![goal; t + 1],
        u_ref: vec![Vector::zeros(1); t],
        x0: to_vector(start),
        u_init,
    };
    Ok(CartPoleOracle {
        solution: ilqr_solve(&problem, &IlqrSettings::default())?,
    })
}

/// Solves the swing-to-goal problem from `start` under nominal dynamics.
///
/// The upright pole is open-loop unstable, so a zero-control initial rollout
/// from a tilted start falls over. The problem is first solved from the
/// upright rest state, and its closed-loop controls from `start` seed the
/// final solve.
pub fn cartpole_ilqr(
    env: &CartPoleConfig,
    cfg: &CartPoleOracleConfig,
    start: &CartPoleState,
) -> Result<CartPoleOracle, IlqrError> {
    let upright = CartPoleState::default();
    let base = solve(env, cfg, &upright, vec![Vector::zeros(1); env.horizon])?;
    if *start == upright {
        return Ok(base);
    }
    let mut warm = Vec::with_capacity(env.horizon);
    cartpole_rollout(env, *start, &mut |t, s| {
        let a = base.action(t, s);
        warm.push(Vector::from_element(1, a));
        a
    });
    solve(env, cfg, start, warm)
}

/// Visitation distribution of the oracle policy from the test-time start.
#[derive(Debug, Clone)]
pub struct OracleDistribution {
    /// Every visited state, start states included.
    pub states: Vec<CartPoleState>,
    /// Normalized histogram of `states` over the grid.
    pub histogram: Vec<f64>,
}

/// One rollout of `policy` from `s0` for the configured horizon.
pub fn cartpole_rollout(
    env: &CartPoleConfig,
    s0: CartPoleState,
    policy: &mut dyn FnMut(usize, &CartPoleState) -> f64,
) -> Vec<CartPoleState> {
    let mut out = Vec::with_capacity(env.horizon + 1);
    out.push(s0);
    let mut s = s0;
    for t in 0..env.horizon {
        let a = policy(t, &s);
        s = env.control_step(&s, a);
        out.push(s);
    }
    out
}

/// Rolls the oracle out `n` times from sampled starts under nominal dynamics.
pub fn cartpole_oracle_distribution<R: Rng + ?Sized>(
    env: &CartPoleConfig,
    oracle: &CartPoleOracle,
    grid: &StateGrid,
    n: usize,
    rng: &mut R,
) -> OracleDistribution {
    let mut states = Vec::with_capacity(n * (env.horizon + 1));
    for _ in 0..n {
        let s0 = env.sample_start(rng);
        states.extend(cartpole_rollout(env, s0, &mut |t, s| oracle.action(t, s)));
    }
    let histogram = grid.histogram(&states);
    OracleDistribution { states, histogram }
}
