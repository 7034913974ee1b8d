//! Kinodynamic planning over robot and object poses.

mod rrt;
mod trajectory;

pub use rrt::{
    entity_weights, extend, nearest, plan, propagate, sample_state, weighted_distance, NnWeights,
    Node, PlanStats, PlannerConfig, Tree,
};
pub use trajectory::{PlannedTrajectory, TRAJECTORY_SCHEMA};
