//! Dense feed-forward networks with reverse-mode gradients.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::RlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Tanh,
    Linear,
}

/// Fully connected network: ReLU hidden layers, tanh or linear output.
///
/// Weights are stored as `(inputs, outputs)` so a batch is `X·W + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub output: OutputActivation,
}

/// Gradients with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpGrads {
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            v.push(w.as_slice().expect("standard layout"));
            v.push(b.as_slice().expect("standard layout"));
        }
        v
    }
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer; `inputs[0]` is the network input.
    inputs: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases. `widths` lists every layer width
    /// including input and output.
    pub fn new<R: Rng + ?Sized>(widths: &[usize], output: OutputActivation, rng: &mut R) -> Self {
        assert!(widths.len() >= 2, "network needs input and output widths");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in widths.windows(2) {
            let lim = (6.0 / (w[0] + w[1]) as f64).sqrt();
            weights.push(Array2::from_shape_fn((w[0], w[1]), |_| rng.random_range(-lim..lim)));
            biases.push(Array1::zeros(w[1]));
        }
        Self {
            weights,
            biases,
            output,
        }
    }

    /// Network with every parameter zero.
    pub fn zeros(widths: &[usize], output: OutputActivation) -> Self {
        Self {
            weights: widths
                .windows(2)
                .map(|w| Array2::zeros((w[0], w[1])))
                .collect(),
            biases: widths[1..].iter().map(|&n| Array1::zeros(n)).collect(),
            output,
        }
    }

    pub fn input_width(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn output_width(&self) -> usize {
        self.weights.last().unwrap().ncols()
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn check(&self, width: usize) -> Result<(), RlError> {
        if width != self.input_width() {
            return Err(RlError::WidthMismatch {
                expected: self.input_width(),
                got: width,
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: ArrayView1<f64>) -> Result<Array1<f64>, RlError> {
        let batch = x.insert_axis(Axis(0));
        Ok(self.forward_batch(batch)?.index_axis_move(Axis(0), 0))
    }

    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, RlError> {
        Ok(self.forward_cached(x)?.output)
    }

    pub fn forward_cached(&self, x: ArrayView2<f64>) -> Result<ForwardCache, RlError> {
        self.check(x.ncols())?;
        let n = self.weights.len();
        let mut inputs = Vec::with_capacity(n);
        let mut h = x.to_owned();
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = h.dot(w);
            z += b;
            inputs.push(h);
            if i + 1 < n {
                z.mapv_inplace(|v| v.max(0.0));
            } else if self.output == OutputActivation::Tanh {
                z.mapv_inplace(f64::tanh);
            }
            h = z;
        }
        Ok(ForwardCache { inputs, output: h })
    }

    /// Gradients of `Σ output ⊙ upstream` with respect to the parameters and the input.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: ArrayView2<f64>,
    ) -> Result<(MlpGrads, Array2<f64>), RlError> {
        if upstream.dim() != cache.output.dim() {
            return Err(RlError::WidthMismatch {
                expected: cache.output.ncols(),
                got: upstream.ncols(),
            });
        }
        let n = self.weights.len();
        let mut dz = upstream.to_owned();
        if self.output == OutputActivation::Tanh {
            dz.zip_mut_with(&cache.output, |g, y| *g *= 1.0 - y * y);
        }
        let mut gw = vec![Array2::zeros((0, 0)); n];
        let mut gb = vec![Array1::zeros(0); n];
        for i in (0..n).rev() {
            let input = &cache.inputs[i];
            let g = input.t().dot(&dz);
            gw[i] = if g.is_standard_layout() { g } else { g.as_standard_layout().into_owned() };
            gb[i] = dz.sum_axis(Axis(0));
            let mut dx = dz.dot(&self.weights[i].t());
            if i > 0 {
                // `input` is the ReLU output of the previous layer.
                dx.zip_mut_with(input, |g, a| {
                    if *a <= 0.0 {
                        *g = 0.0
                    }
                });
            }
            dz = dx;
        }
        Ok((
            MlpGrads {
                weights: gw,
                biases: gb,
            },
            dz,
        ))
    }

    /// Mutable views of every parameter tensor in a fixed order.
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v: Vec<&mut [f64]> = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            v.push(w.as_slice_mut().expect("standard layout"));
            v.push(b.as_slice_mut().expect("standard layout"));
        }
        v
    }

    pub fn param_slices(&self) -> Vec<&[f64]> {
        let mut v: Vec<&[f64]> = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter().zip(self.biases.iter()) {
            v.push(w.as_slice().expect("standard layout"));
            v.push(b.as_slice().expect("standard layout"));
        }
        v
    }

    /// `self ← polyak · self + (1 − polyak) · source`.
    pub fn polyak_from(&mut self, source: &Mlp, polyak: f64) {
        for (dst, src) in self.param_slices_mut().into_iter().zip(source.param_slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d = polyak * *d + (1.0 - polyak) * s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[4, 8, 3], OutputActivation::Linear);
        let y = net.forward(array![1.0, -2.0, 3.0, 0.5].view()).unwrap();
        assert_eq!(y, Array1::<f64>::zeros(3));
    }

    #[test]
    fn hand_computed_single_path() {
        let mut net = Mlp::zeros(&[2, 2, 1], OutputActivation::Linear);
        net.weights[0] = array![[2.0, 0.0], [0.0, -1.0]];
        net.biases[0] = array![0.5, 0.0];
        net.weights[1] = array![[3.0], [1.0]];
        net.biases[1] = array![-1.0];
        // h = relu([2·1 + 0.5, −1·2]) = [2.5, 0]; y = 3·2.5 − 1.
        let y = net.forward(array![1.0, 2.0].view()).unwrap();
        assert_eq!(y[0], 6.5);
        net.output = OutputActivation::Tanh;
        assert_eq!(net.forward(array![1.0, 2.0].view()).unwrap()[0], 6.5f64.tanh());
    }

    #[test]
    fn forward_is_deterministic_and_checks_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::new(&[5, 16, 16, 2], OutputActivation::Tanh, &mut rng);
        let x = array![0.1, -0.4, 2.0, 0.0, 1.0];
        assert_eq!(net.forward(x.view()).unwrap(), net.forward(x.view()).unwrap());
        assert!(matches!(
            net.forward(array![1.0, 2.0].view()),
            Err(RlError::WidthMismatch { expected: 5, got: 2 })
        ));
    }

    #[test]
    fn linear_layer_gradient_is_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::new(&[3, 2], OutputActivation::Linear, &mut rng);
        let x = array![[0.5, -1.0, 2.0]];
        let up = array![[1.5, -0.25]];
        let cache = net.forward_cached(x.view()).unwrap();
        let (g, dx) = net.backward(&cache, up.view()).unwrap();
        assert_eq!(g.weights[0], x.t().dot(&up));
        assert_eq!(g.biases[0], array![1.5, -0.25]);
        assert_eq!(dx, up.dot(&net.weights[0].t()));
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(&[4, 8, 8, 2], OutputActivation::Tanh, &mut rng);
        let x = Array::from_shape_fn((3, 4), |(i, j)| (i + j) as f64 * 0.1);
        let cache = net.forward_cached(x.view()).unwrap();
        let (g, dx) = net.backward(&cache, Array2::zeros((3, 2)).view()).unwrap();
        assert!(g.slices().iter().all(|s| s.iter().all(|v| *v == 0.0)));
        assert!(dx.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn polyak_one_keeps_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut target = Mlp::new(&[3, 4, 1], OutputActivation::Linear, &mut rng);
        let main = Mlp::new(&[3, 4, 1], OutputActivation::Linear, &mut rng);
        let before = target.clone();
        target.polyak_from(&main, 1.0);
        assert_eq!(target, before);
        target.polyak_from(&main, 0.0);
        assert_eq!(target, main);
    }
}
