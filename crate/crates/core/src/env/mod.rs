//! Rearrangement environments built from layout files, plus the cart-pole.

mod cartpole;
mod layout;
mod rearrange;

pub use cartpole::{cartpole_step, CartPoleConfig, CartPoleParams, CartPoleState, CARTPOLE_DT};
pub use layout::{EntitySpec, Goal, Layout, ShapeSpec, LAYOUT_SCHEMA};
pub use rearrange::{
    action_to_twist, decode_observation, goal_reward, observe, sample_uniform_state,
    twist_to_action, EnvConfig, ObsNoise, RearrangeEnv, StepOutcome, ACTION_LIMITS, CONTROL_DT,
};
