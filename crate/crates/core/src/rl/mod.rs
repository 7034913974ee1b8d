//! Goal-conditioned off-policy learning: networks, optimizer, replay and DDPG.

mod adam;
mod ddpg;
mod mlp;
mod normalizer;
mod replay;

pub use adam::Adam;
pub use ddpg::{DdpgAgent, DdpgConfig, Policy, UpdateStats, CHECKPOINT_SCHEMA};
pub use mlp::{ForwardCache, Mlp, MlpGrads, OutputActivation};
pub use normalizer::Normalizer;
pub use replay::{her_relabel, ReplayBuffer, Transition};
