//! Planned trajectories and their JSON file format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::Goal;
use crate::error::PlanError;
use crate::geometry::Twist2;
use crate::physics::{self, ModelKind, PhysicsParams, Scene, WorldState};

pub const TRAJECTORY_SCHEMA: u32 = 1;

/// States visited by the planner, with the control and duration of each edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedTrajectory {
    pub schema: u32,
    pub model: ModelKind,
    pub seed: u64,
    pub layout: String,
    pub goal: Goal,
    /// Control period used to propagate each edge.
    pub step_dt: f64,
    pub states: Vec<WorldState>,
    pub controls: Vec<Twist2>,
    pub durations: Vec<f64>,
}

impl PlannedTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of control periods in edge `i`.
    pub fn edge_steps(&self, i: usize) -> usize {
        (self.durations[i] / self.step_dt).round() as usize
    }

    /// Per-period controls: edge `i`'s twist repeated for its duration.
    pub fn step_controls(&self) -> Vec<Twist2> {
        (0..self.controls.len())
            .flat_map(|i| std::iter::repeat_n(self.controls[i], self.edge_steps(i)))
            .collect()
    }

    /// Dense state sequence at every control period (length `step_controls().len() + 1`).
    pub fn dense_states(
        &self,
        scene: &Scene,
        params: &PhysicsParams,
    ) -> Result<Vec<WorldState>, PlanError> {
        let mut out = vec![self.states[0].clone()];
        for (i, u) in self.controls.iter().enumerate() {
            let mut s = self.states[i].clone();
            for _ in 0..self.edge_steps(i) {
                s = physics::step(self.model, scene, &s, u, self.step_dt, params)
                    .map_err(|e| PlanError::Format(format!("edge {i} no longer replays: {e}")))?;
                out.push(s.clone());
            }
        }
        Ok(out)
    }

    fn validate(&self) -> Result<(), PlanError> {
        if self.schema != TRAJECTORY_SCHEMA {
            return Err(PlanError::Format(format!(
                "unsupported trajectory schema {} (expected {TRAJECTORY_SCHEMA})",
                self.schema
            )));
        }
        if self.states.is_empty() {
            return Err(PlanError::Format("trajectory has no states".into()));
        }
        if self.controls.len() + 1 != self.states.len() || self.durations.len() != self.controls.len()
        {
            return Err(PlanError::Format(format!(
                "{} states need {} controls and durations, found {} and {}",
                self.states.len(),
                self.states.len() - 1,
                self.controls.len(),
                self.durations.len()
            )));
        }
        if !(self.step_dt > 0.0) || self.durations.iter().any(|d| !(*d > 0.0)) {
            return Err(PlanError::Format("durations must be positive".into()));
        }
        let m = self.states[0].object_poses.len();
        if self
            .states
            .iter()
            .any(|s| s.object_poses.len() != m || s.object_twists.len() != m)
        {
            return Err(PlanError::Format("inconsistent object counts".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        let t: PlannedTrajectory =
            serde_json::from_str(text).map_err(|e| PlanError::Format(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn read(path: &Path) -> Result<Self, PlanError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| PlanError::Format(format!("{}: {e}", path.display())))
    }
}
