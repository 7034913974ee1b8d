//! Training with mixed episodic resets, evaluation and learning-curve summaries.

mod cartpole_study;
mod curve;
mod eval;
mod reset;
mod train;

pub use curve::{
    episodes_to_threshold, format_episodes, percentile, CurvePoint, LearningCurve,
    ThresholdSummary,
};
pub use eval::{evaluate, run_episode, Controller};
pub use reset::{
    sample_initial_state, ResetKind, ResetMix, RESET_JITTER, RESET_JITTER_TRIES,
};
pub use train::{learn_from_episode, train, TrainConfig, TrainOutput};
pub use cartpole_study::{
    cartpole_train, kl_divergence, policy_kl, CartPoleStudyConfig, KlPoint, KlSeries, StateBox, StateGrid,
    KL_SMOOTHING,
};
