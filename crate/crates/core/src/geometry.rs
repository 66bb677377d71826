//! Planar geometry: vectors, rotations and rigid poses in SE(2).

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

/// A planar vector. Units depend on context (m, m/s or m/s²).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Checked constructor for values crossing an input boundary.
    pub fn try_new(x: f64, y: f64, what: &'static str) -> Result<Self> {
        let v = Self { x, y };
        v.ensure_finite(what)?;
        Ok(v)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn ensure_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn dot(&self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(*self)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: Vec2) -> f64 {
        (*self - other).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(&self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn to_vector(self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }
}

impl From<Vector2<f64>> for Vec2 {
    fn from(v: Vector2<f64>) -> Self {
        Vec2::new(v[0], v[1])
    }
}

impl From<Vec2> for Vector2<f64> {
    fn from(v: Vec2) -> Self {
        v.to_vector()
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2::new(x, y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Planar rotation stored as (cos, sin) of its angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot2 {
    cos: f64,
    sin: f64,
}

impl Default for Rot2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rot2 {
    pub const fn identity() -> Self {
        Self { cos: 1.0, sin: 0.0 }
    }

    /// Counter-clockwise rotation by `angle` radians.
    pub fn from_angle(angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self { cos, sin }
    }

    pub fn angle(&self) -> f64 {
        self.sin.atan2(self.cos)
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.cos, -self.sin, self.sin, self.cos)
    }

    /// The inverse of a rotation is its transpose.
    pub fn inverse(&self) -> Self {
        Self {
            cos: self.cos,
            sin: -self.sin,
        }
    }

    pub fn transpose(&self) -> Self {
        self.inverse()
    }

    pub fn rotate(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.cos * v.x - self.sin * v.y,
            self.sin * v.x + self.cos * v.y,
        )
    }

    /// Applies `Rᵀ` to `v`.
    pub fn rotate_transposed(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.cos * v.x + self.sin * v.y,
            -self.sin * v.x + self.cos * v.y,
        )
    }

    pub fn compose(&self, other: &Rot2) -> Rot2 {
        Rot2 {
            cos: self.cos * other.cos - self.sin * other.sin,
            sin: self.sin * other.cos + self.cos * other.sin,
        }
    }
}

impl Mul for Rot2 {
    type Output = Rot2;
    fn mul(self, rhs: Rot2) -> Rot2 {
        self.compose(&rhs)
    }
}

/// Expresses a body-frame vector in the stable frame.
///
/// The measurement model applies the transpose of the body-to-stable rotation, so a
/// detection at body `(1, 0)` with a +90° heading lands at stable `(0, -1)`.
pub fn rotate_body_to_stable(v_body: Vec2, body_to_stable: Rot2) -> Vec2 {
    body_to_stable.rotate_transposed(v_body)
}

/// Inverse of [`rotate_body_to_stable`].
pub fn rotate_stable_to_body(v_stable: Vec2, body_to_stable: Rot2) -> Vec2 {
    body_to_stable.rotate(v_stable)
}

/// Rigid transform in SE(2): `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2 {
    pub rotation: Rot2,
    pub translation: Vec2,
}

impl Pose2 {
    pub fn new(rotation: Rot2, translation: Vec2) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn transform_point(&self, p: Vec2) -> Vec2 {
        self.rotation.rotate(p) + self.translation
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        Pose2 {
            rotation: self.rotation * other.rotation,
            translation: self.rotation.rotate(other.translation) + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose2 {
        let inv = self.rotation.inverse();
        Pose2 {
            rotation: inv,
            translation: -inv.rotate(self.translation),
        }
    }
}
