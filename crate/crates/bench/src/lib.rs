//! Fixtures shared by the benchmarks.

use leaper_core::env::Layout;
use leaper_core::rl::{Mlp, OutputActivation};
use leaper_core::rng::{stream, Stream};
use leaper_core::{Twist2, WorldState};
use ndarray::Array2;
use rand::Rng;

/// A built-in layout; panics on an unknown id.
pub fn layout(id: &str) -> Layout {
    Layout::builtin(id).expect("built-in layout")
}

/// Start state plus a control that pushes the robot toward the target object.
pub fn push_toward_target(layout: &Layout) -> (WorldState, Twist2) {
    let s = layout.start.clone();
    let r = s.robot_pose;
    let o = s.object_poses[layout.scene.target];
    let (dx, dy) = (o.x - r.x, o.y - r.y);
    let n = dx.hypot(dy).max(1e-9);
    let u = Twist2::new(0.1 * dx / n, 0.1 * dy / n, 0.0);
    (s, u)
}

/// A randomly initialised network and an input batch of matching width.
pub fn mlp_and_batch(widths: &[usize], batch: usize, seed: u64) -> (Mlp, Array2<f64>) {
    let mut rng = stream(seed, Stream::Agent);
    let net = Mlp::new(widths, OutputActivation::Tanh, &mut rng);
    let x = Array2::from_shape_fn((batch, widths[0]), |_| rng.random_range(-1.0..1.0));
    (net, x)
}
