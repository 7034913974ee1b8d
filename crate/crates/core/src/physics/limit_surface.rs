use nalgebra::Vector3;

use super::GRAVITY;
use crate::error::PhysicsError;
use crate::geometry::Twist2;

/// Ellipsoidal limit surface of a sliding object:
/// `(f_x/f_max)² + (f_y/f_max)² + (m/m_max)² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSurface {
    pub f_max: f64,
    pub m_max: f64,
}

impl LimitSurface {
    /// Surface for an object of `mass` with table friction `mu` and moment
    /// constant `c` (`m_max = c · f_max`), taking the normal force as `mass · g`.
    pub fn for_object(mass: f64, mu: f64, c: f64) -> Self {
        let f_max = mu * mass * GRAVITY;
        Self {
            f_max,
            m_max: c * f_max,
        }
    }

    /// Value of the implicit surface function; 1 on the surface.
    pub fn evaluate(&self, w: &Vector3<f64>) -> f64 {
        (w.x / self.f_max).powi(2) + (w.y / self.f_max).powi(2) + (w.z / self.m_max).powi(2)
    }

    /// Scales a nonzero wrench radially onto the surface.
    pub fn project(&self, w: &Vector3<f64>) -> Vector3<f64> {
        w / self.evaluate(w).sqrt()
    }

    /// Object motion direction for an applied wrench `(f_x, f_y, m)`.
    ///
    /// The wrench is first scaled onto the surface; the result is the unit
    /// outward normal `(2f_x/f_max², 2f_y/f_max², 2m/m_max²)` read as
    /// `(v_x, v_y, ω)`.
    pub fn velocity_direction(&self, wrench: &Vector3<f64>) -> Result<Twist2, PhysicsError> {
        if wrench.norm() == 0.0 || !wrench.iter().all(|v| v.is_finite()) {
            return Err(PhysicsError::ZeroWrench);
        }
        let w = self.project(wrench);
        let g = Vector3::new(
            2.0 * w.x / (self.f_max * self.f_max),
            2.0 * w.y / (self.f_max * self.f_max),
            2.0 * w.z / (self.m_max * self.m_max),
        );
        let g = g / g.norm();
        Ok(Twist2::new(g.x, g.y, g.z))
    }

    /// Wrench direction producing twist `v`; inverse of [`Self::velocity_direction`]
    /// up to positive scale, normalised so the force part has unit weight.
    #[inline]
    pub fn wrench_for_twist(&self, v: &Twist2) -> Vector3<f64> {
        let c2 = (self.m_max / self.f_max).powi(2);
        Vector3::new(v.vx, v.vy, c2 * v.omega)
    }

    /// `(m_max / f_max)²`.
    #[inline]
    pub fn moment_ratio_sq(&self) -> f64 {
        (self.m_max / self.f_max).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ls() -> LimitSurface {
        LimitSurface::for_object(0.1, 0.5, 0.024)
    }

    #[test]
    fn centroidal_force_translates() {
        let v = ls().velocity_direction(&Vector3::new(0.3, 0.0, 0.0)).unwrap();
        assert!(v.vx > 0.0);
        assert_eq!(v.vy, 0.0);
        assert_eq!(v.omega, 0.0);
    }

    #[test]
    fn pure_moment_rotates() {
        let v = ls().velocity_direction(&Vector3::new(0.0, 0.0, 0.01)).unwrap();
        assert_eq!((v.vx, v.vy), (0.0, 0.0));
        assert!(v.omega > 0.0);
    }

    #[test]
    fn zero_wrench_is_an_error() {
        assert_eq!(
            ls().velocity_direction(&Vector3::zeros()),
            Err(PhysicsError::ZeroWrench)
        );
    }

    #[test]
    fn normal_matches_finite_difference_gradient() {
        let s = ls();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let w = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.02..0.02),
            );
            let on = s.project(&w);
            let mut grad = Vector3::zeros();
            for i in 0..3 {
                let h = 1e-6 * on.abs().max() + 1e-9;
                let (mut p, mut m) = (on, on);
                p[i] += h;
                m[i] -= h;
                grad[i] = (s.evaluate(&p) - s.evaluate(&m)) / (2.0 * h);
            }
            let grad = grad / grad.norm();
            let v = s.velocity_direction(&w).unwrap();
            let got = Vector3::new(v.vx, v.vy, v.omega);
            let angle = got.dot(&grad).clamp(-1.0, 1.0).acos();
            assert!(angle < 1e-6, "angle {angle}");
        }
    }

    #[test]
    fn wrench_for_twist_inverts_direction() {
        let s = ls();
        let t = Twist2::new(0.1, -0.05, 2.0);
        let v = s.velocity_direction(&s.wrench_for_twist(&t)).unwrap();
        let a = Vector3::new(v.vx, v.vy, v.omega);
        let b = Vector3::new(t.vx, t.vy, t.omega).normalize();
        assert!((a - b).norm() < 1e-12);
    }
}
