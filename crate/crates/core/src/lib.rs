//! Planar nonprehensile rearrangement: contact models, a physics-constrained
//! RRT planner, goal-conditioned DDPG with hindsight replay, and a training
//! loop whose episodes can reset to states along a planned trajectory.

// NaN-rejecting range checks read as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod env;
pub mod error;
pub mod geometry;
pub mod io;
pub mod physics;
pub mod planner;
pub mod rl;
pub mod rng;
pub mod trainer;

pub use error::*;
pub use geometry::{ConvexShape, EntityClass, SE2Pose, ShapeKind, Twist2};
pub use physics::{ModelKind, PhysicsParams, Scene, WorldState};
