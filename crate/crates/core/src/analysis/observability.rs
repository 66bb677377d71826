//! Observability of the combined swarm under relative position measurements only.
//!
//! State: `[… x_i y_i ẋ_i ẏ_i …]`, per-UAV constant-velocity blocks. Each ordered
//! pair `(k, l)` contributes two rows measuring `p_k − p_l`. The stacked matrix
//! `[H; H·F; …; H·F^{d−1}]` loses exactly four dimensions: a common translation
//! and a common velocity of the whole swarm.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, spectral_norm};

/// Relative tolerance used for null-space membership.
pub const NULL_SPACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedSystem {
    pub n: usize,
    pub dt: f64,
    pub transition: DMatrix<f64>,
    pub observation: DMatrix<f64>,
}

/// Ordered pairs `(k, l)`, `k ≠ l`, in row-major order.
pub fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|k| (0..n).filter(move |&l| l != k).map(move |l| (k, l)))
        .collect()
}

pub fn build_combined_system(n: usize, dt: f64) -> Result<CombinedSystem> {
    if n < 2 {
        return Err(Error::SwarmTooSmall { min: 2, got: n });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let dim = 4 * n;
    let mut f = DMatrix::identity(dim, dim);
    for i in 0..n {
        f[(4 * i, 4 * i + 2)] = dt;
        f[(4 * i + 1, 4 * i + 3)] = dt;
    }
    let pairs = ordered_pairs(n);
    let mut h = DMatrix::zeros(2 * pairs.len(), dim);
    for (row, &(k, l)) in pairs.iter().enumerate() {
        for axis in 0..2 {
            h[(2 * row + axis, 4 * k + axis)] = 1.0;
            h[(2 * row + axis, 4 * l + axis)] = -1.0;
        }
    }
    Ok(CombinedSystem {
        n,
        dt,
        transition: f,
        observation: h,
    })
}

impl CombinedSystem {
    pub fn state_dim(&self) -> usize {
        4 * self.n
    }

    /// Adds an absolute position measurement of UAV `index`.
    pub fn with_absolute_position(&self, index: usize) -> Result<CombinedSystem> {
        if index >= self.n {
            return Err(Error::InvalidArgument(format!(
                "UAV index {index} out of range for swarm of {}",
                self.n
            )));
        }
        let rows = self.observation.nrows();
        let mut h = self.observation.clone().resize_vertically(rows + 2, 0.0);
        h[(rows, 4 * index)] = 1.0;
        h[(rows + 1, 4 * index + 1)] = 1.0;
        Ok(CombinedSystem {
            observation: h,
            ..self.clone()
        })
    }

    /// `[H; H·F; …; H·F^{d−1}]` with `d` the state dimension.
    pub fn observability_matrix(&self) -> DMatrix<f64> {
        let d = self.state_dim();
        let m = self.observation.nrows();
        let mut o = DMatrix::zeros(m * d, d);
        let mut block = self.observation.clone();
        for k in 0..d {
            o.view_mut((k * m, 0), (m, d)).copy_from(&block);
            block = &block * &self.transition;
        }
        o
    }
}

pub fn observability_rank(sys: &CombinedSystem) -> usize {
    numerical_rank(&sys.observability_matrix())
}

/// The four vectors `1ₙ ⊗ e_j`, j = 1..4.
pub fn uniform_translation_basis(n: usize) -> Vec<DVector<f64>> {
    (0..4)
        .map(|j| DVector::from_fn(4 * n, |i, _| if i % 4 == j { 1.0 } else { 0.0 }))
        .collect()
}

/// `‖O·v‖ ≤ tol·‖O‖·‖v‖`.
pub fn in_null_space(o: &DMatrix<f64>, o_norm: f64, v: &DVector<f64>) -> bool {
    (o * v).norm() <= NULL_SPACE_TOL * o_norm * v.norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceReport {
    pub state_dim: usize,
    pub rank: usize,
    pub nullity: usize,
    /// Every uniform-translation vector lies in the null space.
    pub basis_in_null_space: bool,
    /// The four vectors are independent and account for the whole null space.
    pub basis_spans_null_space: bool,
}

pub fn null_space_report(sys: &CombinedSystem) -> NullSpaceReport {
    let o = sys.observability_matrix();
    let o_norm = spectral_norm(&o);
    let rank = numerical_rank(&o);
    let d = sys.state_dim();
    let basis = uniform_translation_basis(sys.n);
    let inside = basis.iter().all(|v| in_null_space(&o, o_norm, v));
    let stacked = DMatrix::from_columns(&basis);
    let independent = numerical_rank(&stacked) == basis.len();
    NullSpaceReport {
        state_dim: d,
        rank,
        nullity: d - rank,
        basis_in_null_space: inside,
        basis_spans_null_space: inside && independent && d - rank == basis.len(),
    }
}

/// True when the uniform-translation vectors lie in and span the null space.
pub fn unobservable_basis_check(sys: &CombinedSystem) -> bool {
    null_space_report(sys).basis_spans_null_space
}
