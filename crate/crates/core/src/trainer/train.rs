use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate, sample_initial_state, CurvePoint, LearningCurve, ResetKind, ResetMix};
use crate::env::{goal_reward, EnvConfig, Layout, RearrangeEnv};
use crate::error::TrainError;
use crate::physics::WorldState;
use crate::rl::{her_relabel, DdpgAgent, DdpgConfig, ReplayBuffer, Transition};
use crate::rng::{stream, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Training episode budget.
    pub episodes: usize,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Optimizer steps after each episode; targets are mixed once per episode.
    pub updates_per_episode: usize,
    /// Relabelled copies per transition.
    pub her_k: usize,
    pub reset: ResetMix,
    /// Stop as soon as an evaluation reaches this success rate.
    pub stop_at: Option<f64>,
    pub agent: DdpgConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 1000,
            eval_interval: 50,
            eval_episodes: 20,
            updates_per_episode: 40,
            her_k: 4,
            reset: ResetMix::start_only(),
            stop_at: None,
            agent: DdpgConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        self.reset.validate()?;
        self.agent.validate().map_err(TrainError::Config)?;
        if self.eval_interval == 0 || self.eval_episodes == 0 {
            return Err(TrainError::Config(
                "eval_interval and eval_episodes must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub agent: DdpgAgent,
    pub curve: LearningCurve,
    /// Episodes started from each source, in [`ResetKind`] order.
    pub reset_counts: [usize; 4],
    pub episodes_run: usize,
    /// Agent stream state at the end of training, for checkpointing.
    pub agent_rng: ChaCha8Rng,
}

/// Goal-conditioned DDPG with hindsight relabelling, with episode resets
/// drawn from `config.reset`. `planned` holds the planned-trajectory states
/// used for planned resets.
///
/// Training uses `env_config` (normally the randomized full-contact model);
/// evaluation always starts from the canonical start under the same config.
/// `on_eval` sees every curve point as it is produced.
pub fn train(
    layout: &Layout,
    env_config: &EnvConfig,
    config: &TrainConfig,
    planned: Option<&[WorldState]>,
    seed: u64,
    config_id: &str,
    on_eval: &mut dyn FnMut(&CurvePoint),
) -> Result<TrainOutput, TrainError> {
    config.validate()?;
    if config.reset.planned > 0.0 && planned.is_none_or(|p| p.is_empty()) {
        return Err(TrainError::MissingTrajectory);
    }
    let mut env_rng = stream(seed, Stream::Env);
    let mut agent_rng = stream(seed, Stream::Agent);
    let mut reset_rng = stream(seed, Stream::Reset);
    let mut eval_rng = stream(seed, Stream::Eval);

    let mut env = RearrangeEnv::new(layout.clone(), env_config.clone())?;
    let mut eval_env = RearrangeEnv::new(layout.clone(), env_config.clone())?;
    let goal = layout.goal.center().to_vec();
    let radius = env_config.goal_radius;
    let reward_fn = move |a: &[f64], g: &[f64]| goal_reward(a, g, radius);

    let mut agent = DdpgAgent::new(env.obs_dim(), 2, 3, config.agent.clone(), &mut agent_rng);
    let mut buffer = ReplayBuffer::new(config.agent.buffer_capacity);
    let mut curve = LearningCurve {
        seed,
        config_id: config_id.to_string(),
        points: Vec::new(),
    };
    let mut reset_counts = [0usize; 4];
    let mut episodes_run = 0;

    for ep in 0..config.episodes {
        let (s0, kind) = sample_initial_state(&config.reset, layout, planned, &mut reset_rng)?;
        reset_counts[kind as usize] += 1;
        let mut obs = env.reset(Some(&s0), &mut env_rng)?;
        let mut episode = Vec::with_capacity(env_config.episode_len);
        for _ in 0..env_config.episode_len {
            let (action, _) = agent.explore(&obs, &goal, &mut agent_rng);
            let out = env.step_action(&action, &mut env_rng);
            episode.push(Transition {
                obs: std::mem::replace(&mut obs, out.obs.clone()),
                goal: goal.clone(),
                action,
                reward: out.reward,
                next_obs: out.obs,
                achieved_goal: out.achieved_goal.to_vec(),
                done: out.done,
            });
        }
        learn_from_episode(
            &mut agent,
            &mut buffer,
            &episode,
            config.her_k,
            config.updates_per_episode,
            &reward_fn,
            &|a: &[f64]| a.to_vec(),
            &mut agent_rng,
        );
        episodes_run = ep + 1;

        if episodes_run % config.eval_interval == 0 {
            let mut policy = agent.policy();
            let rate = evaluate(&mut policy, &mut eval_env, config.eval_episodes, &mut eval_rng);
            let point = CurvePoint {
                episode: episodes_run,
                success_rate: rate,
            };
            on_eval(&point);
            curve.points.push(point);
            if config.stop_at.is_some_and(|t| rate >= t) {
                break;
            }
        }
    }
    Ok(TrainOutput {
        agent,
        curve,
        reset_counts,
        episodes_run,
        agent_rng,
    })
}

/// Stores `episode` with hindsight copies, refreshes the input normalizers,
/// runs `updates` optimizer steps and mixes the target networks once.
#[allow(clippy::too_many_arguments)]
pub fn learn_from_episode<R: Rng + ?Sized>(
    agent: &mut DdpgAgent,
    buffer: &mut ReplayBuffer,
    episode: &[Transition],
    her_k: usize,
    updates: usize,
    reward_fn: &dyn Fn(&[f64], &[f64]) -> f64,
    goal_of: &dyn Fn(&[f64]) -> Vec<f64>,
    rng: &mut R,
) {
    let relabelled = her_relabel(episode, her_k, rng, reward_fn, goal_of);
    agent.update_normalizers(relabelled.iter());
    buffer.extend(relabelled);
    for _ in 0..updates {
        let batch = buffer.sample(agent.config.batch_size, rng);
        agent.optimize(&batch);
    }
    agent.update_targets();
}

impl ResetKind {
    pub const ALL: [ResetKind; 4] = [
        ResetKind::Start,
        ResetKind::Uniform,
        ResetKind::Planned,
        ResetKind::Oracle,
    ];
}
