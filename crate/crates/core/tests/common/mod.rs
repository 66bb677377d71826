//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use swa_core::Vec2;

/// Constant-acceleration transition for 2-D position/velocity/acceleration, with
/// `damping` on the velocity diagonal.
pub fn ca_transition(dt: f64, damping: f64) -> DMatrix<f64> {
    let mut f = DMatrix::identity(6, 6);
    for axis in 0..2 {
        f[(axis, 2 + axis)] = dt;
        f[(axis, 4 + axis)] = dt * dt / 2.0;
        f[(2 + axis, 2 + axis)] = damping;
        f[(2 + axis, 4 + axis)] = dt;
    }
    f
}

pub fn block_selector(block: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(2, 6);
    h[(0, 2 * block)] = 1.0;
    h[(1, 2 * block + 1)] = 1.0;
    h
}

pub struct Measurement {
    pub step: usize,
    pub h: DMatrix<f64>,
    pub z: DVector<f64>,
    pub r: DMatrix<f64>,
}

/// A linear-Gaussian window `x_{k+1} = F x_k + u_k + w_k` for `k < steps`.
pub struct Window {
    pub prior_mean: DVector<f64>,
    pub prior_cov: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub inputs: Vec<DVector<f64>>,
    pub measurements: Vec<Measurement>,
}

/// Weighted least squares over the stacked trajectory `[x_0; …; x_N]`, solved from
/// the normal equations. Returns the mean and covariance of `x_N`.
pub fn batch_wls(w: &Window) -> (DVector<f64>, DMatrix<f64>) {
    let d = w.prior_mean.len();
    let steps = w.inputs.len();
    let dim = d * (steps + 1);
    let mut info = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    let mut add = |a: DMatrix<f64>, b: DVector<f64>, weight: DMatrix<f64>| {
        let at_w = a.transpose() * weight;
        info += &at_w * &a;
        rhs += &at_w * b;
    };
    let inv = |m: &DMatrix<f64>| m.clone().try_inverse().expect("invertible weight");

    let mut a = DMatrix::zeros(d, dim);
    a.view_mut((0, 0), (d, d)).fill_with_identity();
    add(a, w.prior_mean.clone(), inv(&w.prior_cov));

    for k in 0..steps {
        let mut a = DMatrix::zeros(d, dim);
        a.view_mut((0, k * d), (d, d)).copy_from(&(-&w.f));
        a.view_mut((0, (k + 1) * d), (d, d)).fill_with_identity();
        add(a, w.inputs[k].clone(), inv(&w.q));
    }
    for m in &w.measurements {
        let mut a = DMatrix::zeros(m.h.nrows(), dim);
        a.view_mut((0, m.step * d), (m.h.nrows(), d)).copy_from(&m.h);
        add(a, m.z.clone(), inv(&m.r));
    }
    let chol = info.cholesky().expect("information matrix positive definite");
    let x = chol.solve(&rhs);
    let cov = chol.inverse();
    (
        x.rows(steps * d, d).into_owned(),
        cov.view((steps * d, steps * d), (d, d)).into_owned(),
    )
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| gaussian(rng))
}

/// Brute-force minimizer of `Σ(2 c·p_i + k − (‖p_i‖² − r²))²` over the center `c`,
/// with the offset `k` eliminated in closed form. Shrinking grid search.
pub fn brute_force_center(points: &[Vec2], r: f64) -> Vec2 {
    let cost = |c: Vec2| {
        let dev: Vec<f64> = points
            .iter()
            .map(|p| p.norm_squared() - r * r - 2.0 * c.x * p.x - 2.0 * c.y * p.y)
            .collect();
        let mean = dev.iter().sum::<f64>() / dev.len() as f64;
        dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>()
    };
    let n = points.len() as f64;
    let mut best = points.iter().fold(Vec2::ZERO, |a, &p| a + p) * (1.0 / n);
    let mut span = 400.0;
    while span > 1e-11 {
        let step = span / 16.0;
        let mut cand = (cost(best), best);
        for i in -16..=16 {
            for j in -16..=16 {
                let c = best + Vec2::new(i as f64 * step, j as f64 * step);
                let f = cost(c);
                if f < cand.0 {
                    cand = (f, c);
                }
            }
        }
        best = cand.1;
        span = step * 2.0;
    }
    best
}
