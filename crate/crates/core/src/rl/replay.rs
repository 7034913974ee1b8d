use rand::Rng;
use serde::{Deserialize, Serialize};

/// One environment step, conditioned on a goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub goal: Vec<f64>,
    /// Normalized action in `[-1, 1]`.
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    /// Goal-space quantity achieved after the step (used for relabelling).
    pub achieved_goal: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring buffer that overwrites its oldest entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    data: Vec<Transition>,
    /// Slot that the next insertion overwrites once full.
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            data: Vec::new(),
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn extend(&mut self, ts: impl IntoIterator<Item = Transition>) {
        for t in ts {
            self.push(t);
        }
    }

    /// Entries from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.data.len() < self.capacity { 0 } else { self.cursor };
        self.data[split..].iter().chain(self.data[..split].iter())
    }

    /// Uniform sample with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<&Transition> {
        (0..n)
            .map(|_| &self.data[rng.random_range(0..self.data.len())])
            .collect()
    }
}

/// Hindsight relabelling with the "future" strategy.
///
/// Returns the episode followed, per transition, by `k` copies whose goal is
/// `goal_of` applied to the achieved goal of a uniformly chosen step at or
/// after it, with the reward recomputed by `reward_fn(achieved, goal)`.
/// `goal_of` maps the achieved quantities into goal space; it is the identity
/// when the two coincide.
pub fn her_relabel<R: Rng + ?Sized>(
    episode: &[Transition],
    k: usize,
    rng: &mut R,
    reward_fn: &dyn Fn(&[f64], &[f64]) -> f64,
    goal_of: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Vec<Transition> {
    let n = episode.len();
    let mut out = Vec::with_capacity(n * (k + 1));
    for (t, tr) in episode.iter().enumerate() {
        out.push(tr.clone());
        for _ in 0..k {
            let future = rng.random_range(t..n);
            let goal = goal_of(&episode[future].achieved_goal);
            let mut copy = tr.clone();
            copy.reward = reward_fn(&tr.achieved_goal, &goal);
            copy.goal = goal;
            out.push(copy);
        }
    }
    out
}
