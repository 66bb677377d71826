//! Small dense linear-algebra kernel shared by the estimators and the analysis tools.
//!
//! Storage and decompositions come from `nalgebra`. The pseudoinverse used by the
//! circle fit follows the normal-equation form `(AᵀA)⁻¹Aᵀ` and only drops to an
//! SVD when `AᵀA` is numerically singular.

use nalgebra::{DMatrix, SMatrix, SymmetricEigen};

/// Relative singular-value threshold for [`numerical_rank`].
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Eigenvalue ratio of `AᵀA` below which the normal equations are abandoned.
/// Squares the singular-value ratio, so this corresponds to σ_min/σ_max ≈ 1e-6.
const NORMAL_EQUATION_RCOND: f64 = 1e-12;

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `RANK_TOLERANCE · σ_max`. Zero for a zero matrix.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    numerical_rank_with_tol(m, RANK_TOLERANCE)
}

pub fn numerical_rank_with_tol(m: &DMatrix<f64>, tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&max) = sv.first() else { return 0 };
    if max == 0.0 || !max.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Largest singular value (spectral norm).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Moore–Penrose pseudoinverse via `(AᵀA)⁻¹Aᵀ`, falling back to the SVD when `AᵀA`
/// is singular within tolerance (e.g. rank-deficient `A`).
pub fn pseudoinverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    normal_equation_pseudoinverse(a).unwrap_or_else(|| svd_pseudoinverse(a))
}

/// Normal-equation route only; `None` when `AᵀA` is not safely invertible.
pub fn normal_equation_pseudoinverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let at = a.transpose();
    let ata = &at * a;
    let eig = SymmetricEigen::new(ata.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    if max == 0.0 || min <= NORMAL_EQUATION_RCOND * max {
        return None;
    }
    let inv = ata.cholesky()?.inverse();
    Some(inv * at)
}

pub fn svd_pseudoinverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let max = spectral_norm(a);
    let eps = RANK_TOLERANCE * max.max(f64::MIN_POSITIVE);
    a.clone()
        .pseudo_inverse(eps)
        .unwrap_or_else(|_| DMatrix::zeros(a.ncols(), a.nrows()))
}

/// Inverse of a small square matrix (used for innovation covariances, `D ≤ 6`).
pub fn invert_small<const D: usize>(m: &SMatrix<f64, D, D>) -> Option<SMatrix<f64, D, D>> {
    let inv = m.try_inverse()?;
    inv.iter().all(|v| v.is_finite()).then_some(inv)
}

/// `C ← (C + Cᵀ)/2`.
pub fn symmetrize<const D: usize>(c: &SMatrix<f64, D, D>) -> SMatrix<f64, D, D> {
    (c + c.transpose()) * 0.5
}

pub fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &e| acc.min(e))
}
