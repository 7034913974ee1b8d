use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::PhysicsError;

pub const NOMINAL_MASS: f64 = 0.1;
pub const NOMINAL_FRICTION: f64 = 0.5;

/// Bound on rejection-sampling attempts per parameter.
const MAX_RESAMPLES: usize = 1000;

/// Coulomb coefficients by entity-pair class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactFriction {
    pub robot_object: f64,
    pub object_object: f64,
    pub object_obstacle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    /// kg, one per movable object.
    pub mass: Vec<f64>,
    pub friction_contact: ContactFriction,
    /// Object–table Coulomb coefficient, one per movable object.
    pub friction_table: Vec<f64>,
    /// Ratio `m_max / f_max` of the limit-surface ellipsoid, in meters.
    pub pressure_moment_const: f64,
}

impl PhysicsParams {
    /// Nominal parameters for `m` cubes with the given half-width.
    pub fn nominal(m: usize, half_width: f64) -> Self {
        Self {
            mass: vec![NOMINAL_MASS; m],
            friction_contact: ContactFriction {
                robot_object: NOMINAL_FRICTION,
                object_object: NOMINAL_FRICTION,
                object_obstacle: NOMINAL_FRICTION,
            },
            friction_table: vec![NOMINAL_FRICTION; m],
            pressure_moment_const: 0.6 * half_width,
        }
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let fc = &self.friction_contact;
        let pair = [fc.robot_object, fc.object_object, fc.object_obstacle];
        let all = self
            .mass
            .iter()
            .chain(self.friction_table.iter())
            .chain(pair.iter())
            .chain(std::iter::once(&self.pressure_moment_const));
        for v in all {
            if !(v.is_finite() && *v > 0.0) {
                return Err(PhysicsError::InvalidParams(format!(
                    "all parameters must be strictly positive, found {v}"
                )));
            }
        }
        if self.mass.len() != self.friction_table.len() {
            return Err(PhysicsError::InvalidParams(
                "mass and table-friction lists differ in length".into(),
            ));
        }
        Ok(())
    }
}

/// Draws from `Normal(nominal, spread · nominal)`, resampling nonpositive draws.
fn sample_positive<R: Rng + ?Sized>(nominal: f64, spread: f64, rng: &mut R) -> f64 {
    let std = spread * nominal;
    if std <= 0.0 {
        return nominal;
    }
    let dist = Normal::new(nominal, std).expect("finite std");
    for _ in 0..MAX_RESAMPLES {
        let v = dist.sample(rng);
        if v > 0.0 {
            return v;
        }
    }
    nominal
}

/// Domain-randomized parameters: every mass and friction coefficient is drawn
/// from a normal centred on its nominal value with standard deviation
/// `spread` times the nominal (the episode default is `spread = 2`).
pub fn sample_params<R: Rng + ?Sized>(
    nominal: &PhysicsParams,
    spread: f64,
    rng: &mut R,
) -> PhysicsParams {
    let mut out = nominal.clone();
    for m in out.mass.iter_mut() {
        *m = sample_positive(*m, spread, rng);
    }
    let fc = &mut out.friction_contact;
    fc.robot_object = sample_positive(fc.robot_object, spread, rng);
    fc.object_object = sample_positive(fc.object_object, spread, rng);
    fc.object_obstacle = sample_positive(fc.object_obstacle, spread, rng);
    for f in out.friction_table.iter_mut() {
        *f = sample_positive(*f, spread, rng);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_spread_returns_nominal() {
        let nom = PhysicsParams::nominal(3, 0.04);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_params(&nom, 0.0, &mut rng), nom);
    }

    /// Mean of Normal(mu, sigma) truncated to (0, ∞) by Simpson quadrature.
    fn truncated_mean_by_quadrature(mu: f64, sigma: f64) -> f64 {
        let pdf = |x: f64| (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp();
        let (a, b, n) = (0.0, mu + 12.0 * sigma, 200_000);
        let h = (b - a) / n as f64;
        let simpson = |f: &dyn Fn(f64) -> f64| {
            let mut s = f(a) + f(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * f(a + i as f64 * h);
            }
            s * h / 3.0
        };
        simpson(&|x| x * pdf(x)) / simpson(&pdf)
    }

    #[test]
    fn empirical_mean_matches_truncated_normal() {
        let nom = PhysicsParams::nominal(1, 0.04);
        let mut nom = nom;
        nom.mass[0] = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_params(&nom, 2.0, &mut rng).mass[0])
            .collect();
        assert!(draws.iter().all(|&m| m > 0.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let expected = truncated_mean_by_quadrature(1.0, 2.0);
        assert!(
            (mean - expected).abs() < 3.0 * var.sqrt() / (n as f64).sqrt(),
            "mean {mean} vs {expected}"
        );
    }

    #[test]
    fn all_draws_strictly_positive() {
        let nom = PhysicsParams::nominal(3, 0.04);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100_000 {
            let p = sample_params(&nom, 2.0, &mut rng);
            assert!(p.validate().is_ok());
        }
    }
}
