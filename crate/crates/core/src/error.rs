use thiserror::Error;

use crate::geometry::ShapeKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("shape extents must be strictly positive and finite: {0:?}")]
    InvalidExtent(ShapeKind),
    #[error("C-state length mismatch: {left} vs {right} poses, {weights} weights")]
    LengthMismatch {
        left: usize,
        right: usize,
        weights: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhysicsError {
    #[error("zero wrench has no motion direction")]
    ZeroWrench,
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("invalid physics parameters: {0}")]
    InvalidParams(String),
    #[error("step rejected: {0}")]
    Rejected(RejectReason),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    /// Residual overlap between two entities (ids, depth in meters).
    Penetration(usize, usize, f64),
    /// Push propagation revisited an object too many times.
    PushCycle(usize),
    /// An entity left the table.
    OffTable,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::Penetration(a, b, d) => {
                write!(f, "entities {a} and {b} overlap by {d:.3e} m")
            }
            RejectReason::PushCycle(j) => write!(f, "push propagation cycles through object {j}"),
            RejectReason::OffTable => write!(f, "an entity left the table"),
        }
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("initial state is in collision: {0}")]
    InitialCollision(RejectReason),
    #[error("state has {got} objects, layout has {expected}")]
    ObjectCount { expected: usize, got: usize },
    #[error("layout error: {0}")]
    Layout(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("start state is in collision: {0}")]
    StartInCollision(RejectReason),
    #[error("no solution after {iterations} iterations ({nodes} nodes, best target distance {best_distance:.4} m)")]
    Exhausted {
        iterations: usize,
        nodes: usize,
        best_distance: f64,
    },
    #[error("invalid planner config: {0}")]
    Config(String),
    #[error("trajectory file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RlError {
    #[error("input width {got} does not match expected {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("planned resets requested but no trajectory was provided")]
    MissingTrajectory,
    #[error("invalid reset distribution: {0}")]
    Distribution(String),
    #[error("invalid training config: {0}")]
    Config(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IlqrError {
    #[error("control Hessian not positive definite at step {step} after regularization reached {mu:.3e}")]
    NotPositiveDefinite { step: usize, mu: f64 },
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
