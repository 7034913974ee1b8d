//! Trajectory-following baselines and the cart-pole optimal controller.

mod cartpole;
mod ilqr;
mod tracking;

pub use cartpole::{
    cartpole_ilqr, cartpole_oracle_distribution, cartpole_rollout, CartPoleOracle,
    CartPoleOracleConfig, OracleDistribution,
};
pub use ilqr::{
    euclidean_error, ilqr_solve, linearize, IlqrProblem, IlqrSettings, IlqrSolution, Matrix,
    Vector,
};
pub use tracking::{
    ilqr_track_solve, pose_vector, state_error, state_from_vector, state_vector, tracking_trials, ControllerKind, IlqrTracker,
    OpenLoop, Reference, TrackingConfig, TrackingResult, VelocityFeedback,
};
