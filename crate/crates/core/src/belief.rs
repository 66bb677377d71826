//! Gaussian belief (mean + covariance) with the linear Kalman predict/correct steps.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::linalg::{invert_small, symmetrize};

pub type Vector6 = SVector<f64, 6>;
pub type Matrix6 = SMatrix<f64, 6, 6>;

#[derive(Debug, Clone, PartialEq)]
pub struct Belief<const D: usize> {
    pub mean: SVector<f64, D>,
    pub cov: SMatrix<f64, D, D>,
}

impl<const D: usize> Belief<D> {
    pub fn new(mean: SVector<f64, D>, cov: SMatrix<f64, D, D>) -> Self {
        Self { mean, cov }
    }

    /// Mean and covariance of the 2-vector block starting at `index * 2`.
    pub fn block(&self, index: usize) -> (Vec2, nalgebra::Matrix2<f64>) {
        let i = 2 * index;
        (
            Vec2::new(self.mean[i], self.mean[i + 1]),
            self.cov.fixed_view::<2, 2>(i, i).into_owned(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.mean.iter().chain(self.cov.iter()).all(|v| v.is_finite())
    }

    /// `x ← F·x + u`, `P ← F·P·Fᵀ + Q`. `u` is the already-mapped control term `B·u`.
    pub fn predict(
        &self,
        transition: &SMatrix<f64, D, D>,
        control: Option<&SVector<f64, D>>,
        process_noise: &SMatrix<f64, D, D>,
    ) -> Self {
        let mut mean = transition * self.mean;
        if let Some(u) = control {
            mean += u;
        }
        let cov = transition * self.cov * transition.transpose() + process_noise;
        Self {
            mean,
            cov: symmetrize(&cov),
        }
    }

    /// Standard correction with `K = P Hᵀ (H P Hᵀ + R)⁻¹` and `P ← P − K H P`.
    pub fn correct<const M: usize>(
        &self,
        observation: &SMatrix<f64, M, D>,
        z: &SVector<f64, M>,
        noise: &SMatrix<f64, M, M>,
    ) -> Result<Self> {
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("measurement"));
        }
        let ph_t = self.cov * observation.transpose();
        let innovation_cov = observation * ph_t + noise;
        let s_inv = invert_small(&innovation_cov).ok_or(Error::SingularInnovation)?;
        let gain = ph_t * s_inv;
        let mean = self.mean + gain * (z - observation * self.mean);
        let cov = self.cov - gain * observation * self.cov;
        Ok(Self {
            mean,
            cov: symmetrize(&cov),
        })
    }
}

/// Block-diagonal 6×6 matrix `diag(a·I₂, b·I₂, c·I₂)`.
pub fn diag3_blocks(a: f64, b: f64, c: f64) -> Matrix6 {
    Matrix6::from_diagonal(&Vector6::new(a, a, b, b, c, c))
}

/// Constant-acceleration transition over `dt`, optionally damping the velocity block.
pub(crate) fn kinematic_transition(dt: f64, velocity_damping: f64) -> Matrix6 {
    let mut f = Matrix6::identity();
    for k in 0..2 {
        f[(k, 2 + k)] = dt;
        f[(k, 4 + k)] = 0.5 * dt * dt;
        f[(2 + k, 2 + k)] = velocity_damping;
        f[(2 + k, 4 + k)] = dt;
    }
    f
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTimeStep(dt))
    }
}
