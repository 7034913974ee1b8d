#![allow(clippy::needless_range_loop)]

use leaper_core::rl::{DdpgAgent, DdpgConfig, Mlp, OutputActivation, Transition};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_fn((r, c), |_| rng.random_range(-1.0..1.0))
}

/// Largest relative error between backprop and central differences of
/// `Σ f(x) ⊙ upstream` over every parameter and input coordinate.
fn mlp_check(net: &Mlp, x: &Array2<f64>, up: &Array2<f64>) -> f64 {
    let obj = |n: &Mlp, x: &Array2<f64>| (n.forward_batch(x.view()).unwrap() * up).sum();
    let cache = net.forward_cached(x.view()).unwrap();
    let (grads, dx) = net.backward(&cache, up.view()).unwrap();
    let mut worst: f64 = 0.0;
    let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
    for (k, g) in analytic.iter().enumerate() {
        for i in 0..g.len() {
            let mut p = net.clone();
            p.param_slices_mut()[k][i] += H;
            let fp = obj(&p, x);
            p.param_slices_mut()[k][i] -= 2.0 * H;
            let fm = obj(&p, x);
            worst = worst.max(rel_err(g[i], (fp - fm) / (2.0 * H)));
        }
    }
    for idx in 0..x.len() {
        let (r, c) = (idx / x.ncols(), idx % x.ncols());
        let mut xp = x.clone();
        xp[[r, c]] += H;
        let fp = obj(net, &xp);
        xp[[r, c]] -= 2.0 * H;
        let fm = obj(net, &xp);
        worst = worst.max(rel_err(dx[[r, c]], (fp - fm) / (2.0 * H)));
    }
    worst
}

#[test]
fn mlp_gradients_match_finite_differences_on_random_nets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20 {
        let depth = rng.random_range(1..=3);
        let mut widths = vec![rng.random_range(1..=6)];
        for _ in 0..depth {
            widths.push(rng.random_range(2..=8));
        }
        widths.push(rng.random_range(1..=4));
        let act = if trial % 2 == 0 {
            OutputActivation::Tanh
        } else {
            OutputActivation::Linear
        };
        let mut net = Mlp::new(&widths, act, &mut rng);
        for b in &mut net.biases {
            b.mapv_inplace(|_| rng.random_range(-0.3..0.3));
        }
        let batch = rng.random_range(1..=4);
        let x = random_matrix(&mut rng, batch, widths[0]);
        let up = random_matrix(&mut rng, batch, *widths.last().unwrap());
        let err = mlp_check(&net, &x, &up);
        assert!(err < 1e-4, "trial {trial} widths {widths:?}: {err:e}");
    }
}

fn transitions(rng: &mut ChaCha8Rng, n: usize) -> Vec<Transition> {
    (0..n)
        .map(|_| Transition {
            obs: (0..5).map(|_| rng.random_range(-1.0..1.0)).collect(),
            goal: (0..2).map(|_| rng.random_range(-1.0..1.0)).collect(),
            action: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
            reward: if rng.random_bool(0.5) { 0.0 } else { -1.0 },
            next_obs: (0..5).map(|_| rng.random_range(-1.0..1.0)).collect(),
            achieved_goal: vec![0.0; 2],
            done: false,
        })
        .collect()
}

#[test]
fn actor_and_critic_loss_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cfg = DdpgConfig {
        hidden: vec![6, 5],
        ..DdpgConfig::default()
    };
    for _ in 0..5 {
        let agent = DdpgAgent::new(5, 2, 3, cfg.clone(), &mut rng);
        let data = transitions(&mut rng, 6);
        let batch: Vec<&Transition> = data.iter().collect();
        let (_, cg, ag) = agent.gradients(&batch);
        let mut worst: f64 = 0.0;
        for (k, g) in cg.slices().iter().enumerate() {
            for i in 0..g.len() {
                let mut a = agent.clone();
                a.critic.param_slices_mut()[k][i] += H;
                let lp = a.gradients(&batch).0.critic_loss;
                a.critic.param_slices_mut()[k][i] -= 2.0 * H;
                let lm = a.gradients(&batch).0.critic_loss;
                worst = worst.max(rel_err(g[i], (lp - lm) / (2.0 * H)));
            }
        }
        for (k, g) in ag.slices().iter().enumerate() {
            for i in 0..g.len() {
                let mut a = agent.clone();
                a.actor.param_slices_mut()[k][i] += H;
                let lp = a.gradients(&batch).0.actor_loss;
                a.actor.param_slices_mut()[k][i] -= 2.0 * H;
                let lm = a.gradients(&batch).0.actor_loss;
                worst = worst.max(rel_err(g[i], (lp - lm) / (2.0 * H)));
            }
        }
        assert!(worst < 1e-4, "{worst:e}");
    }
}
