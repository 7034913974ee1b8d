use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector2};
use serde::{Deserialize, Serialize};

pub type Vec2 = Vector2<f64>;

/// Wraps an angle into (−π, π].
#[inline]
pub fn normalize_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Signed shortest-arc difference `a − b`, in (−π, π].
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

/// 2D cross product of two vectors (z component).
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// `ω × r` for a planar angular velocity.
#[inline]
pub fn cross_scalar(omega: f64, r: &Vec2) -> Vec2 {
    Vec2::new(-omega * r.y, omega * r.x)
}

/// Rigid planar pose. `theta` is kept in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SE2Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Default for SE2Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl SE2Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub const fn identity() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    #[inline]
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// `self ∘ other`: `other` expressed in the frame of `self`.
    pub fn compose(&self, other: &SE2Pose) -> SE2Pose {
        let (s, c) = self.theta.sin_cos();
        SE2Pose::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )
    }

    pub fn inverse(&self) -> SE2Pose {
        let (s, c) = self.theta.sin_cos();
        SE2Pose::new(-c * self.x - s * self.y, s * self.x - c * self.y, -self.theta)
    }

    /// Maps a point from the local frame into the world frame.
    #[inline]
    pub fn transform_point(&self, p: &Vec2) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(self.x + c * p.x - s * p.y, self.y + s * p.x + c * p.y)
    }

    /// Maps a world point into the local frame.
    #[inline]
    pub fn inverse_transform_point(&self, p: &Vec2) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        let d = p - self.position();
        Vec2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }

    #[inline]
    pub fn rotate(&self, v: &Vec2) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
    }

    /// Pose reached by holding the world-frame twist `u` for `t` seconds
    /// (translation and rotation about the body origin integrated independently).
    #[inline]
    pub fn advanced(&self, u: &Twist2, t: f64) -> SE2Pose {
        SE2Pose::new(self.x + u.vx * t, self.y + u.vy * t, self.theta + u.omega * t)
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let (s, c) = self.theta.sin_cos();
        Matrix3::new(c, -s, self.x, s, c, self.y, 0.0, 0.0, 1.0)
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> SE2Pose {
        SE2Pose::new(m[(0, 2)], m[(1, 2)], m[(1, 0)].atan2(m[(0, 0)]))
    }

    /// Largest absolute field-wise difference, with the angle compared on the circle.
    pub fn max_abs_diff(&self, other: &SE2Pose) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max(angle_diff(self.theta, other.theta).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Planar velocity (vx, vy in m/s; omega in rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist2 {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Twist2 {
    pub const ZERO: Twist2 = Twist2 {
        vx: 0.0,
        vy: 0.0,
        omega: 0.0,
    };

    pub const fn new(vx: f64, vy: f64, omega: f64) -> Self {
        Self { vx, vy, omega }
    }

    #[inline]
    pub fn linear(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }

    pub fn is_zero(&self) -> bool {
        self.vx == 0.0 && self.vy == 0.0 && self.omega == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.vx.is_finite() && self.vy.is_finite() && self.omega.is_finite()
    }

    pub fn scaled(&self, k: f64) -> Twist2 {
        Twist2::new(self.vx * k, self.vy * k, self.omega * k)
    }

    /// Velocity of the material point at `r` (relative to the body origin, world axes).
    #[inline]
    pub fn point_velocity(&self, r: &Vec2) -> Vec2 {
        self.linear() + cross_scalar(self.omega, r)
    }

    /// Re-expresses the twist about another reference point offset by `d` from the current one.
    #[inline]
    pub fn shifted(&self, d: &Vec2) -> Twist2 {
        let v = self.point_velocity(d);
        Twist2::new(v.x, v.y, self.omega)
    }

    /// Component-wise clamp into `±limits`.
    pub fn clamped(&self, limits: &Twist2) -> Twist2 {
        Twist2::new(
            self.vx.clamp(-limits.vx, limits.vx),
            self.vy.clamp(-limits.vy, limits.vy),
            self.omega.clamp(-limits.omega, limits.omega),
        )
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.vx, self.vy, self.omega]
    }

    pub fn from_slice(v: &[f64]) -> Twist2 {
        Twist2::new(v[0], v[1], v[2])
    }
}
