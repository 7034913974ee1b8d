//! Cart-pole study of how the reset distribution affects the learned
//! policy's state distribution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{learn_from_episode, ResetKind, ResetMix};
use crate::baselines::{cartpole_rollout, OracleDistribution};
use crate::env::{CartPoleConfig, CartPoleState};
use crate::error::TrainError;
use crate::rl::{DdpgAgent, DdpgConfig, Policy, ReplayBuffer, Transition};
use crate::rng::{stream, Stream};

/// Regular grid over a box in cart-pole state space; states outside the box
/// fall into the edge bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateGrid {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
    pub bins: usize,
}

impl Default for StateGrid {
    /// Bins of 0.25 m, 0.5 m/s, 0.2 rad and 0.8 rad/s, offset by half a bin
    /// so the rest state and the default goal sit at bin centres.
    fn default() -> Self {
        Self {
            lo: [-2.625, -5.25, -2.1, -8.4],
            hi: [2.375, 4.75, 1.9, 7.6],
            bins: 20,
        }
    }
}

impl StateGrid {
    pub fn len(&self) -> usize {
        self.bins.pow(4)
    }

    pub fn is_empty(&self) -> bool {
        self.bins == 0
    }

    pub fn index(&self, s: &CartPoleState) -> usize {
        let v = s.to_array();
        let mut idx = 0;
        for d in 0..4 {
            let f = (v[d] - self.lo[d]) / (self.hi[d] - self.lo[d]);
            let b = ((f * self.bins as f64).floor().max(0.0) as usize).min(self.bins - 1);
            idx = idx * self.bins + b;
        }
        idx
    }

    /// Normalized occupancy of `states`.
    pub fn histogram(&self, states: &[CartPoleState]) -> Vec<f64> {
        let mut h = vec![0.0; self.len()];
        for s in states {
            h[self.index(s)] += 1.0;
        }
        let n = states.len().max(1) as f64;
        h.iter_mut().for_each(|v| *v /= n);
        h
    }

}

/// Axis-aligned box of cart-pole states for uniform resets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateBox {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl Default for StateBox {
    fn default() -> Self {
        Self {
            lo: [-0.5, -1.0, -0.3, -1.0],
            hi: [1.5, 1.0, 0.3, 1.0],
        }
    }
}

impl StateBox {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CartPoleState {
        let v: Vec<f64> = (0..4).map(|d| rng.random_range(self.lo[d]..self.hi[d])).collect();
        CartPoleState::from_slice(&v)
    }
}

/// `KL(p ‖ q)` after adding `smoothing` to every bin and renormalizing.
pub fn kl_divergence(p: &[f64], q: &[f64], smoothing: f64) -> f64 {
    assert_eq!(p.len(), q.len());
    let zp: f64 = p.iter().sum::<f64>() + smoothing * p.len() as f64;
    let zq: f64 = q.iter().sum::<f64>() + smoothing * q.len() as f64;
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            let a = (a + smoothing) / zp;
            let b = (b + smoothing) / zq;
            if a > 0.0 {
                a * (a / b).ln()
            } else {
                0.0
            }
        })
        .sum()
}

pub const KL_SMOOTHING: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CartPoleStudyConfig {
    pub env: CartPoleConfig,
    pub episodes: usize,
    pub eval_interval: usize,
    /// Greedy rollouts from the test-time start per KL measurement.
    pub eval_rollouts: usize,
    pub updates_per_episode: usize,
    pub her_k: usize,
    pub oracle_rollouts: usize,
    pub grid: StateGrid,
    /// Support of the uniform reset distribution.
    pub uniform: StateBox,
    pub agent: DdpgConfig,
}

impl Default for CartPoleStudyConfig {
    fn default() -> Self {
        Self {
            env: CartPoleConfig::default(),
            episodes: 600,
            eval_interval: 25,
            eval_rollouts: 10,
            updates_per_episode: 40,
            her_k: 4,
            oracle_rollouts: 20,
            grid: StateGrid::default(),
            uniform: StateBox::default(),
            agent: DdpgConfig {
                hidden: vec![64, 64],
                batch_size: 128,
                lr_actor: 1e-3,
                lr_critic: 1e-3,
                // Full-force random pushes every few steps topple a balanced
                // pole, leaving almost no balancing data in the buffer.
                random_eps: 0.1,
                noise_eps: 0.1,
                ..DdpgConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KlPoint {
    pub episode: usize,
    pub kl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlSeries {
    pub config_id: String,
    pub seed: u64,
    pub points: Vec<KlPoint>,
}

/// KL from the greedy policy's visitation distribution (from the test-time
/// start) to the oracle's.
pub fn policy_kl<R: Rng + ?Sized>(
    policy: &Policy,
    cfg: &CartPoleStudyConfig,
    oracle: &OracleDistribution,
    rng: &mut R,
) -> f64 {
    let env = &cfg.env;
    let goal = env.goal();
    let mut states = Vec::new();
    for _ in 0..cfg.eval_rollouts {
        let s0 = env.sample_start(rng);
        states.extend(cartpole_rollout(env, s0, &mut |_, s| {
            policy.act(&CartPoleConfig::observe(s), &goal)[0]
        }));
    }
    kl_divergence(&cfg.grid.histogram(&states), &oracle.histogram, KL_SMOOTHING)
}

/// Trains on the cart-pole task with resets drawn from `mix` (the planned
/// weight must be zero) and records the KL series.
pub fn cartpole_train(
    cfg: &CartPoleStudyConfig,
    mix: &ResetMix,
    oracle: &OracleDistribution,
    seed: u64,
    config_id: &str,
) -> Result<(DdpgAgent, KlSeries), TrainError> {
    mix.validate()?;
    if mix.planned > 0.0 {
        return Err(TrainError::Distribution(
            "the cart-pole study has no planned trajectory".into(),
        ));
    }
    cfg.agent.validate().map_err(TrainError::Config)?;
    let env = &cfg.env;
    let mut agent_rng = stream(seed, Stream::Agent);
    let mut reset_rng = stream(seed, Stream::Reset);
    let mut env_rng = stream(seed, Stream::Env);
    let mut eval_rng = stream(seed, Stream::Eval);
    let mut agent = DdpgAgent::new(5, 1, 1, cfg.agent.clone(), &mut agent_rng);
    let mut buffer = ReplayBuffer::new(cfg.agent.buffer_capacity);
    let goal = env.goal().to_vec();
    let reward_fn = |a: &[f64], g: &[f64]| env.reward(a, g);
    let mut series = KlSeries {
        config_id: config_id.to_string(),
        seed,
        points: Vec::new(),
    };
    for ep in 0..cfg.episodes {
        let mut s = match mix.sample(&mut reset_rng) {
            ResetKind::Start | ResetKind::Planned => env.sample_start(&mut env_rng),
            ResetKind::Uniform => cfg.uniform.sample(&mut reset_rng),
            ResetKind::Oracle => {
                oracle.states[reset_rng.random_range(0..oracle.states.len())]
            }
        };
        let mut episode = Vec::with_capacity(env.horizon);
        for t in 0..env.horizon {
            let obs = CartPoleConfig::observe(&s);
            let (action, _) = agent.explore(&obs, &goal, &mut agent_rng);
            s = env.control_step(&s, action[0]);
            let achieved = CartPoleConfig::achieved(&s).to_vec();
            episode.push(Transition {
                obs,
                goal: goal.clone(),
                action,
                reward: env.reward(&achieved, &goal),
                next_obs: CartPoleConfig::observe(&s),
                achieved_goal: achieved,
                done: t + 1 == env.horizon,
            });
        }
        learn_from_episode(
            &mut agent,
            &mut buffer,
            &episode,
            cfg.her_k,
            cfg.updates_per_episode,
            &reward_fn,
            &|a: &[f64]| CartPoleConfig::goal_of(a),
            &mut agent_rng,
        );
        if (ep + 1) % cfg.eval_interval == 0 {
            let kl = policy_kl(&agent.policy(), cfg, oracle, &mut eval_rng);
            series.points.push(KlPoint {
                episode: ep + 1,
                kl,
            });
        }
    }
    Ok((agent, series))
}
