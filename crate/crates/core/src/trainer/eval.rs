use rand::Rng;

use crate::env::RearrangeEnv;
use crate::physics::WorldState;
use crate::rl::Policy;

/// Closed- or open-loop controller emitting normalized actions in `[-1, 1]³`.
pub trait Controller {
    /// Called before each episode.
    fn reset(&mut self) {}
    fn act(&mut self, obs: &[f64], goal: &[f64], step: usize) -> Vec<f64>;
}

impl Controller for Policy {
    fn act(&mut self, obs: &[f64], goal: &[f64], _step: usize) -> Vec<f64> {
        Policy::act(self, obs, goal)
    }
}

impl<F: FnMut(&[f64], &[f64], usize) -> Vec<f64>> Controller for F {
    fn act(&mut self, obs: &[f64], goal: &[f64], step: usize) -> Vec<f64> {
        self(obs, goal, step)
    }
}

/// Runs one episode from `s0` (or the layout start); true if the target
/// entered the goal region at any step.
pub fn run_episode<C: Controller + ?Sized, R: Rng + ?Sized>(
    env: &mut RearrangeEnv,
    controller: &mut C,
    s0: Option<&WorldState>,
    rng: &mut R,
) -> bool {
    let mut obs = env.reset(s0, rng).expect("episode start must be collision-free");
    let goal = env.layout.goal.center().to_vec();
    controller.reset();
    let mut success = false;
    for t in 0..env.config.episode_len {
        let a = controller.act(&obs, &goal, t);
        let out = env.step_action(&a, rng);
        success |= out.reward == 0.0;
        obs = out.obs;
    }
    success
}

/// Success fraction over `n` episodes from the canonical start.
pub fn evaluate<C: Controller + ?Sized, R: Rng + ?Sized>(
    controller: &mut C,
    env: &mut RearrangeEnv,
    n: usize,
    rng: &mut R,
) -> f64 {
    assert!(n >= 1, "evaluation needs at least one episode");
    let wins = (0..n).filter(|_| run_episode(env, controller, None, rng)).count();
    wins as f64 / n as f64
}
