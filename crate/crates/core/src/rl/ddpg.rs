//! Goal-conditioned DDPG agent.

use std::path::Path;

use ndarray::{s, Array2, ArrayView1};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Adam, Mlp, MlpGrads, Normalizer, OutputActivation, Transition};
use crate::error::RlError;

pub const CHECKPOINT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DdpgConfig {
    pub hidden: Vec<usize>,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub gamma: f64,
    /// Target-network mix: `target ← polyak · target + (1 − polyak) · main`.
    pub polyak: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Probability of a uniformly random exploratory action.
    pub random_eps: f64,
    /// Standard deviation of the Gaussian action noise.
    pub noise_eps: f64,
    /// Weight of the squared-action penalty in the actor loss.
    pub action_l2: f64,
    pub norm_eps: f64,
    pub norm_clip: f64,
    /// Clip Bellman targets to `[−1/(1−γ), 0]`.
    pub clip_target: bool,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 256, 256],
            lr_actor: 0.01,
            lr_critic: 0.01,
            gamma: 0.98,
            polyak: 0.95,
            batch_size: 256,
            buffer_capacity: 1_000_000,
            random_eps: 0.3,
            noise_eps: 0.2,
            action_l2: 1.0,
            norm_eps: 0.01,
            norm_clip: 5.0,
            clip_target: true,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.hidden.contains(&0) {
            return Err("hidden layer widths must be positive".into());
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(format!("gamma must be in (0, 1), got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.polyak) {
            return Err(format!("polyak must be in [0, 1], got {}", self.polyak));
        }
        if !(0.0..=1.0).contains(&self.random_eps) {
            return Err(format!("random_eps must be in [0, 1], got {}", self.random_eps));
        }
        if !(self.noise_eps >= 0.0) || !(self.action_l2 >= 0.0) {
            return Err("noise_eps and action_l2 must be non-negative".into());
        }
        if !(self.lr_actor > 0.0 && self.lr_critic > 0.0) {
            return Err("learning rates must be positive".into());
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return Err("batch_size and buffer_capacity must be positive".into());
        }
        if !(self.norm_eps > 0.0 && self.norm_clip > 0.0) {
            return Err("normalizer eps and clip must be positive".into());
        }
        Ok(())
    }
}

/// Read-only actor snapshot used for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub actor: Mlp,
    pub obs_norm: Normalizer,
    pub goal_norm: Normalizer,
}

impl Policy {
    pub fn input(&self, obs: &[f64], goal: &[f64]) -> Vec<f64> {
        let mut v = self.obs_norm.normalize(obs);
        v.extend(self.goal_norm.normalize(goal));
        v
    }

    /// Deterministic action in `[-1, 1]^d`.
    pub fn act(&self, obs: &[f64], goal: &[f64]) -> Vec<f64> {
        let x = self.input(obs, goal);
        self.actor
            .forward(ArrayView1::from(&x))
            .expect("policy input width")
            .to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdpgAgent {
    pub config: DdpgConfig,
    pub obs_dim: usize,
    pub goal_dim: usize,
    pub act_dim: usize,
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_target: Mlp,
    pub critic_target: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    pub obs_norm: Normalizer,
    pub goal_norm: Normalizer,
}

/// Scalar losses from one optimization step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
}

fn sizes(net: &Mlp) -> Vec<usize> {
    net.param_slices().iter().map(|s| s.len()).collect()
}

impl DdpgAgent {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        goal_dim: usize,
        act_dim: usize,
        config: DdpgConfig,
        rng: &mut R,
    ) -> Self {
        let inp = obs_dim + goal_dim;
        let mut aw = vec![inp];
        aw.extend(&config.hidden);
        aw.push(act_dim);
        let mut cw = vec![inp + act_dim];
        cw.extend(&config.hidden);
        cw.push(1);
        let actor = Mlp::new(&aw, OutputActivation::Tanh, rng);
        let critic = Mlp::new(&cw, OutputActivation::Linear, rng);
        Self {
            actor_opt: Adam::new(&sizes(&actor), config.lr_actor),
            critic_opt: Adam::new(&sizes(&critic), config.lr_critic),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
            obs_norm: Normalizer::new(obs_dim, config.norm_eps, config.norm_clip),
            goal_norm: Normalizer::new(goal_dim, config.norm_eps, config.norm_clip),
            obs_dim,
            goal_dim,
            act_dim,
            config,
        }
    }

    pub fn policy(&self) -> Policy {
        Policy {
            actor: self.actor.clone(),
            obs_norm: self.obs_norm.clone(),
            goal_norm: self.goal_norm.clone(),
        }
    }

    fn input(&self, obs: &[f64], goal: &[f64]) -> Vec<f64> {
        let mut v = self.obs_norm.normalize(obs);
        v.extend(self.goal_norm.normalize(goal));
        v
    }

    /// Deterministic actor output.
    pub fn act(&self, obs: &[f64], goal: &[f64]) -> Vec<f64> {
        let x = self.input(obs, goal);
        self.actor
            .forward(ArrayView1::from(&x))
            .expect("agent input width")
            .to_vec()
    }

    /// Behaviour-policy action and whether the uniform-random branch was taken.
    pub fn explore<R: Rng + ?Sized>(&self, obs: &[f64], goal: &[f64], rng: &mut R) -> (Vec<f64>, bool) {
        if rng.random::<f64>() < self.config.random_eps {
            let a = (0..self.act_dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            return (a, true);
        }
        let mut a = self.act(obs, goal);
        if self.config.noise_eps > 0.0 {
            let noise = Normal::new(0.0, self.config.noise_eps).expect("finite noise std");
            for v in &mut a {
                *v = (*v + noise.sample(rng)).clamp(-1.0, 1.0);
            }
        }
        (a, false)
    }

    /// Action for `explore = false` (deterministic) or `true` (behaviour policy).
    pub fn action<R: Rng + ?Sized>(&self, obs: &[f64], goal: &[f64], explore: bool, rng: &mut R) -> Vec<f64> {
        if explore {
            self.explore(obs, goal, rng).0
        } else {
            self.act(obs, goal)
        }
    }

    /// Critic estimate for one state-goal-action triple.
    pub fn q_value(&self, obs: &[f64], goal: &[f64], action: &[f64]) -> f64 {
        let mut x = self.input(obs, goal);
        x.extend_from_slice(action);
        self.critic.forward(ArrayView1::from(&x)).expect("critic input width")[0]
    }

    pub fn update_normalizers<'a>(&mut self, ts: impl IntoIterator<Item = &'a Transition> + Clone) {
        self.obs_norm.update(ts.clone().into_iter().map(|t| t.obs.as_slice()));
        self.goal_norm.update(ts.into_iter().map(|t| t.goal.as_slice()));
    }

    fn batch_inputs(&self, batch: &[&Transition], next: bool) -> Array2<f64> {
        let w = self.obs_dim + self.goal_dim;
        let mut x = Array2::zeros((batch.len(), w));
        for (i, t) in batch.iter().enumerate() {
            let obs = if next { &t.next_obs } else { &t.obs };
            let mut row = x.row_mut(i);
            let r = row.as_slice_mut().expect("row-major");
            self.obs_norm.normalize_into(obs, &mut r[..self.obs_dim]);
            self.goal_norm.normalize_into(&t.goal, &mut r[self.obs_dim..]);
        }
        x
    }

    fn concat(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
        ndarray::concatenate(ndarray::Axis(1), &[a.view(), b.view()]).expect("equal batch sizes")
    }

    /// Losses and their parameter gradients (critic, actor) on `batch`, all
    /// evaluated at the current parameters.
    pub fn gradients(&self, batch: &[&Transition]) -> (UpdateStats, MlpGrads, MlpGrads) {
        assert!(!batch.is_empty(), "empty batch");
        let n = batch.len() as f64;
        let x = self.batch_inputs(batch, false);
        let xn = self.batch_inputs(batch, true);
        let mut acts = Array2::zeros((batch.len(), self.act_dim));
        for (i, t) in batch.iter().enumerate() {
            acts.row_mut(i).assign(&ArrayView1::from(&t.action));
        }

        // Bellman targets from the target networks.
        let next_a = self.actor_target.forward_batch(xn.view()).expect("width");
        let next_q = self
            .critic_target
            .forward_batch(Self::concat(&xn, &next_a).view())
            .expect("width");
        let lo = -1.0 / (1.0 - self.config.gamma);
        let y: Vec<f64> = batch
            .iter()
            .zip(next_q.column(0))
            .map(|(t, q)| {
                let y = t.reward + self.config.gamma * q;
                if self.config.clip_target {
                    y.clamp(lo, 0.0)
                } else {
                    y
                }
            })
            .collect();

        let cc = self.critic.forward_cached(Self::concat(&x, &acts).view()).expect("width");
        let mut up = Array2::zeros((batch.len(), 1));
        let mut critic_loss = 0.0;
        for i in 0..batch.len() {
            let d = cc.output[[i, 0]] - y[i];
            critic_loss += d * d / n;
            up[[i, 0]] = 2.0 * d / n;
        }
        let (cgrads, _) = self.critic.backward(&cc, up.view()).expect("shape");

        let ac = self.actor.forward_cached(x.view()).expect("width");
        let pi = &ac.output;
        let qc = self.critic.forward_cached(Self::concat(&x, pi).view()).expect("width");
        let q_up = Array2::from_elem((batch.len(), 1), -1.0 / n);
        let (_, dinput) = self.critic.backward(&qc, q_up.view()).expect("shape");
        let l2 = self.config.action_l2;
        let denom = n * self.act_dim as f64;
        let mut dpi = dinput.slice(s![.., self.obs_dim + self.goal_dim..]).to_owned();
        dpi.zip_mut_with(pi, |g, a| *g += 2.0 * l2 * a / denom);
        let (agrads, _) = self.actor.backward(&ac, dpi.view()).expect("shape");
        let actor_loss =
            -qc.output.sum() / n + l2 * pi.iter().map(|a| a * a).sum::<f64>() / denom;
        let stats = UpdateStats {
            critic_loss,
            actor_loss,
        };
        (stats, cgrads, agrads)
    }

    /// One critic and one actor step on `batch`, both computed from the
    /// pre-update parameters. Target networks are untouched; call
    /// [`Self::update_targets`] separately.
    pub fn optimize(&mut self, batch: &[&Transition]) -> UpdateStats {
        let (stats, cgrads, agrads) = self.gradients(batch);
        self.critic_opt.update(self.critic.param_slices_mut(), cgrads.slices());
        self.actor_opt.update(self.actor.param_slices_mut(), agrads.slices());
        stats
    }

    pub fn update_targets(&mut self) {
        let p = self.config.polyak;
        self.actor_target.polyak_from(&self.actor, p);
        self.critic_target.polyak_from(&self.critic, p);
    }

    /// Optimizer step followed by a target-network update.
    pub fn update(&mut self, batch: &[&Transition]) -> UpdateStats {
        let stats = self.optimize(batch);
        self.update_targets();
        stats
    }

    pub fn save_checkpoint(&self, rng: Option<&ChaCha8Rng>, path: &Path) -> Result<(), RlError> {
        let ck = CheckpointRef {
            schema: CHECKPOINT_SCHEMA,
            agent: self,
            rng,
        };
        let text = serde_json::to_string(&ck).map_err(|e| RlError::Checkpoint(e.to_string()))?;
        crate::io::write_atomic(path, text.as_bytes())
            .map_err(|e| RlError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load_checkpoint(path: &Path) -> Result<(DdpgAgent, Option<ChaCha8Rng>), RlError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RlError::Checkpoint(format!("{}: {e}", path.display())))?;
        let ck: Checkpoint =
            serde_json::from_str(&text).map_err(|e| RlError::Checkpoint(e.to_string()))?;
        if ck.schema != CHECKPOINT_SCHEMA {
            return Err(RlError::Checkpoint(format!(
                "unsupported checkpoint schema {}",
                ck.schema
            )));
        }
        Ok((ck.agent, ck.rng))
    }
}

#[derive(Serialize)]
struct CheckpointRef<'a> {
    schema: u32,
    agent: &'a DdpgAgent,
    rng: Option<&'a ChaCha8Rng>,
}

#[derive(Deserialize)]
struct Checkpoint {
    schema: u32,
    agent: DdpgAgent,
    rng: Option<ChaCha8Rng>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn small() -> DdpgConfig {
        DdpgConfig {
            hidden: vec![16, 16],
            lr_actor: 1e-3,
            lr_critic: 1e-3,
            ..DdpgConfig::default()
        }
    }

    fn batch(rng: &mut ChaCha8Rng, n: usize) -> Vec<Transition> {
        (0..n)
            .map(|_| Transition {
                obs: (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
                goal: (0..2).map(|_| rng.random_range(-1.0..1.0)).collect(),
                action: (0..2).map(|_| rng.random_range(-1.0..1.0)).collect(),
                reward: -1.0,
                next_obs: (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
                achieved_goal: vec![0.0, 0.0],
                done: false,
            })
            .collect()
    }

    #[test]
    fn deterministic_action_is_repeatable_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let agent = DdpgAgent::new(4, 2, 2, small(), &mut rng);
        let a = agent.action(&[0.1, 0.2, 0.3, 0.4], &[1.0, 2.0], false, &mut rng);
        let b = agent.action(&[0.1, 0.2, 0.3, 0.4], &[1.0, 2.0], false, &mut rng);
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn exploration_mixes_random_and_noisy_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let agent = DdpgAgent::new(4, 2, 3, small(), &mut rng);
        let mut random = 0;
        for _ in 0..10_000 {
            let (a, r) = agent.explore(&[0.0; 4], &[0.0; 2], &mut rng);
            random += r as usize;
            assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
        let frac = random as f64 / 10_000.0;
        assert!((frac - 0.3).abs() < 0.02, "random fraction {frac}");
    }

    #[test]
    fn zero_discount_regresses_to_immediate_reward() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = DdpgConfig {
            gamma: 1e-9,
            ..small()
        };
        let mut agent = DdpgAgent::new(4, 2, 2, cfg, &mut rng);
        let data = batch(&mut rng, 8);
        let refs: Vec<&Transition> = data.iter().collect();
        for _ in 0..2000 {
            agent.update(&refs);
        }
        for t in &data {
            let q = agent.q_value(&t.obs, &t.goal, &t.action);
            assert!((q + 1.0).abs() < 0.05, "q = {q}");
        }
    }

    #[test]
    fn critic_loss_trends_down_on_a_fixed_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut agent = DdpgAgent::new(4, 2, 2, small(), &mut rng);
        let data = batch(&mut rng, 32);
        let refs: Vec<&Transition> = data.iter().collect();
        let losses: Vec<f64> = (0..50).map(|_| agent.update(&refs).critic_loss).collect();
        let avg = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let ma: Vec<f64> = losses.windows(10).map(avg).collect();
        assert!(ma.windows(2).filter(|w| w[1] > w[0]).count() <= ma.len() / 10);
        assert!(ma.last().unwrap() < &ma[0]);
    }

    #[test]
    fn polyak_one_freezes_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = DdpgConfig {
            polyak: 1.0,
            ..small()
        };
        let mut agent = DdpgAgent::new(4, 2, 2, cfg, &mut rng);
        let before = (agent.actor_target.clone(), agent.critic_target.clone());
        let data = batch(&mut rng, 8);
        let refs: Vec<&Transition> = data.iter().collect();
        agent.update(&refs);
        assert_ne!(agent.actor, before.0);
        assert_eq!((agent.actor_target.clone(), agent.critic_target.clone()), before);
    }

    #[test]
    fn target_step_stays_between_old_target_and_main() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut agent = DdpgAgent::new(4, 2, 2, small(), &mut rng);
        let data = batch(&mut rng, 8);
        let refs: Vec<&Transition> = data.iter().collect();
        for _ in 0..3 {
            agent.update(&refs);
        }
        let old = agent.critic_target.clone();
        agent.optimize(&refs);
        agent.update_targets();
        for ((t, o), m) in agent
            .critic_target
            .param_slices()
            .iter()
            .zip(old.param_slices())
            .zip(agent.critic.param_slices())
        {
            for ((t, o), m) in t.iter().zip(o).zip(m.iter()) {
                assert!(*t >= o.min(*m) - 1e-15 && *t <= o.max(*m) + 1e-15);
            }
        }
    }

    #[test]
    fn update_is_deterministic() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let mut agent = DdpgAgent::new(4, 2, 2, small(), &mut rng);
            let data = batch(&mut rng, 16);
            let refs: Vec<&Transition> = data.iter().collect();
            agent.update_normalizers(refs.iter().copied());
            for _ in 0..5 {
                agent.update(&refs);
            }
            agent
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut agent = DdpgAgent::new(4, 2, 2, small(), &mut rng);
        let data = batch(&mut rng, 16);
        let refs: Vec<&Transition> = data.iter().collect();
        agent.update_normalizers(refs.iter().copied());
        agent.update(&refs);
        let dir = std::env::temp_dir().join(format!("leaper-ck-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("agent.json");
        agent.save_checkpoint(Some(&rng), &path).unwrap();
        let (loaded, lrng) = DdpgAgent::load_checkpoint(&path).unwrap();
        assert_eq!(loaded, agent);
        assert_eq!(lrng.unwrap(), rng);
        std::fs::write(&path, "{\"schema\": 99}").unwrap();
        assert!(DdpgAgent::load_checkpoint(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
