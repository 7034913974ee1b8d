use serde::{Deserialize, Serialize};

/// Running mean/std normalizer with output clipping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
    count: f64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub eps: f64,
    pub clip: f64,
}

impl Normalizer {
    pub fn new(dim: usize, eps: f64, clip: f64) -> Self {
        Self {
            sum: vec![0.0; dim],
            sumsq: vec![0.0; dim],
            count: 0.0,
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
            eps,
            clip,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn update<'a>(&mut self, rows: impl IntoIterator<Item = &'a [f64]>) {
        for r in rows {
            for (i, v) in r.iter().enumerate() {
                self.sum[i] += v;
                self.sumsq[i] += v * v;
            }
            self.count += 1.0;
        }
        if self.count > 0.0 {
            for i in 0..self.dim() {
                let mean = self.sum[i] / self.count;
                let var = (self.sumsq[i] / self.count - mean * mean).max(self.eps * self.eps);
                self.mean[i] = mean;
                self.std[i] = var.sqrt();
            }
        }
    }

    pub fn normalize_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = ((x[i] - self.mean[i]) / self.std[i]).clamp(-self.clip, self.clip);
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.normalize_into(x, &mut out);
        out
    }
}
