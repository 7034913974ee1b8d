use serde::{Deserialize, Serialize};

/// Adam with bias correction over a fixed list of parameter tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    /// Fresh state for tensors of the given sizes.
    pub fn new(sizes: &[usize], lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn update(&mut self, params: Vec<&mut [f64]>, grads: Vec<&[f64]>) {
        assert_eq!(params.len(), self.m.len(), "optimizer tensor count mismatch");
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (k, (p, g)) in params.into_iter().zip(grads).enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            assert_eq!(p.len(), m.len(), "optimizer tensor size mismatch");
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] -= self.lr * mh / (vh.sqrt() + self.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut a = Adam::new(&[3], 0.01);
        let mut p = vec![1.0, -2.0, 0.5];
        a.update(vec![&mut p], vec![&[0.0, 0.0, 0.0]]);
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(a.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        for g in [1.0, -3.0, 1e-3, 250.0] {
            let mut a = Adam::new(&[1], 0.01);
            let mut p = vec![0.0];
            a.update(vec![&mut p], vec![&[g]]);
            // Bias-corrected first step is lr · g / (|g| + ε).
            let expect = -0.01 * g / (g.abs() + 1e-8);
            assert!((p[0] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_scalar_reference_trace() {
        let (lr, b1, b2, eps) = (0.01, 0.9, 0.999, 1e-8);
        let (mut m, mut v, mut x) = (0.0f64, 0.0f64, 0.0f64);
        let mut a = Adam::new(&[1], lr);
        let mut p = vec![0.0];
        for t in 1..=10 {
            let g = 1.0;
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            x -= lr * (m / (1.0 - b1.powi(t))) / ((v / (1.0 - b2.powi(t))).sqrt() + eps);
            a.update(vec![&mut p], vec![&[g]]);
            assert!((p[0] - x).abs() < 1e-15);
        }
    }
}
