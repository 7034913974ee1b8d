use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{sample_uniform_state, Layout};
use crate::error::TrainError;
use crate::geometry::{SE2Pose, FREE_TOLERANCE};
use crate::physics::WorldState;

/// Source of an episode's initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetKind {
    /// Canonical test-time start.
    Start,
    /// Collision-free uniformly random poses.
    Uniform,
    /// A state from the planned trajectory.
    Planned,
    /// A state visited by an optimal controller.
    Oracle,
}

/// Mixing weights over reset sources; `planned` is the planned-reset probability α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResetMix {
    pub start: f64,
    pub uniform: f64,
    pub planned: f64,
    pub oracle: f64,
}

impl Default for ResetMix {
    fn default() -> Self {
        Self::start_only()
    }
}

impl ResetMix {
    pub fn start_only() -> Self {
        Self {
            start: 1.0,
            uniform: 0.0,
            planned: 0.0,
            oracle: 0.0,
        }
    }

    /// Planned resets with probability `alpha`, canonical start otherwise.
    pub fn planned(alpha: f64) -> Self {
        Self {
            start: 1.0 - alpha,
            planned: alpha,
            ..Self::zero()
        }
    }

    fn zero() -> Self {
        Self {
            start: 0.0,
            uniform: 0.0,
            planned: 0.0,
            oracle: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let w = [self.start, self.uniform, self.planned, self.oracle];
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(TrainError::Distribution(format!(
                "weights must be finite and non-negative: {w:?}"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(TrainError::Distribution(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Draws a source. A start-only mix consumes no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ResetKind {
        if self.start >= 1.0 {
            return ResetKind::Start;
        }
        let r: f64 = rng.random();
        let mut acc = 0.0;
        for (w, k) in [
            (self.planned, ResetKind::Planned),
            (self.uniform, ResetKind::Uniform),
            (self.oracle, ResetKind::Oracle),
        ] {
            acc += w;
            if r < acc {
                return k;
            }
        }
        ResetKind::Start
    }
}

/// Largest pose perturbation (m, rad) used to free a colliding planned state.
pub const RESET_JITTER: f64 = 1e-3;
pub const RESET_JITTER_TRIES: usize = 10;

/// Draws an initial state for the rearrangement environment.
///
/// Planned states are lifted to rest states. A planned state in collision is
/// jittered by up to [`RESET_JITTER`] for [`RESET_JITTER_TRIES`] attempts,
/// after which the canonical start is used. Returns the source actually used.
pub fn sample_initial_state<R: Rng + ?Sized>(
    mix: &ResetMix,
    layout: &Layout,
    planned: Option<&[WorldState]>,
    rng: &mut R,
) -> Result<(WorldState, ResetKind), TrainError> {
    match mix.sample(rng) {
        ResetKind::Start => Ok((layout.start.clone(), ResetKind::Start)),
        ResetKind::Uniform => Ok(match sample_uniform_state(layout, rng, 1000) {
            Some(s) => (s, ResetKind::Uniform),
            None => (layout.start.clone(), ResetKind::Start),
        }),
        ResetKind::Oracle => Err(TrainError::Distribution(
            "oracle resets are only defined for the cart-pole study".into(),
        )),
        ResetKind::Planned => {
            let states = planned
                .filter(|s| !s.is_empty())
                .ok_or(TrainError::MissingTrajectory)?;
            let s = &states[rng.random_range(0..states.len())];
            let mut s = WorldState::at_rest(s.robot_pose, s.object_poses.clone());
            if layout.scene.check_free(&s, FREE_TOLERANCE).is_ok() {
                return Ok((s, ResetKind::Planned));
            }
            let base = s.clone();
            let jitter = |p: &SE2Pose, rng: &mut R| {
                let mut d = || rng.random_range(-RESET_JITTER..=RESET_JITTER);
                SE2Pose::new(p.x + d(), p.y + d(), p.theta + d())
            };
            for _ in 0..RESET_JITTER_TRIES {
                s.robot_pose = jitter(&base.robot_pose, rng);
                for (o, b) in s.object_poses.iter_mut().zip(&base.object_poses) {
                    *o = jitter(b, rng);
                }
                if layout.scene.check_free(&s, FREE_TOLERANCE).is_ok() {
                    return Ok((s, ResetKind::Planned));
                }
            }
            Ok((layout.start.clone(), ResetKind::Start))
        }
    }
}
