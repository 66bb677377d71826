//! Filter consistency: NEES, ANEES and the chi-square acceptance interval.
//!
//! The chi-square inverse CDF is computed here by bisection on the regularized
//! lower incomplete gamma function.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const QUANTILE_TOL: f64 = 1e-10;

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let series = COEFFS
        .iter()
        .enumerate()
        .skip(1)
        .fold(COEFFS[0], |acc, (i, &c)| acc + c / (x + i as f64));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        // Series expansion.
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                break;
            }
        }
        (sum.ln() + log_prefactor).exp().min(1.0)
    } else {
        // Continued fraction for Q(a, x), modified Lentz.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (1.0 - (log_prefactor.exp() * h)).max(0.0)
    }
}

pub fn chi_square_cdf(x: f64, dof: f64) -> f64 {
    regularized_lower_gamma(0.5 * dof, 0.5 * x)
}

/// Inverse chi-square CDF by bisection, to an absolute tolerance of 1e-10.
pub fn chi_square_inverse(p: f64, dof: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!("probability {p} outside (0, 1)")));
    }
    if !(dof > 0.0 && dof.is_finite()) {
        return Err(Error::InvalidArgument(format!("degrees of freedom {dof} must be positive")));
    }
    let mut lo = 0.0;
    let mut hi = dof.max(1.0);
    while chi_square_cdf(hi, dof) < p {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..500 {
        if hi - lo <= QUANTILE_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if chi_square_cdf(mid, dof) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Normalized estimation error squared `eᵀ P⁻¹ e`.
pub fn nees(error: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
    if cov.nrows() != error.len() || cov.ncols() != error.len() {
        return Err(Error::DimensionMismatch {
            expected: error.len(),
            got: cov.nrows(),
        });
    }
    let inv = cov
        .clone()
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or(Error::SingularCovariance)?;
    Ok((error.transpose() * inv * error)[(0, 0)].max(0.0))
}

/// `[r₁, r₂]` for the ANEES of `runs` runs of an `n_x`-dimensional error.
pub fn anees_bounds(runs: usize, n_x: usize, alpha: f64) -> Result<(f64, f64)> {
    if runs == 0 || n_x == 0 {
        return Err(Error::InvalidArgument("runs and n_x must be positive".into()));
    }
    let k = runs as f64;
    let dof = k * n_x as f64;
    Ok((
        chi_square_inverse(0.5 * alpha, dof)? / k,
        chi_square_inverse(1.0 - 0.5 * alpha, dof)? / k,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AneesReport {
    /// Per-step ANEES ε̄_k.
    pub values: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    pub runs: usize,
    pub n_x: usize,
    /// Fraction of steps with ε̄_k inside `[lower, upper]`.
    pub pass_fraction: f64,
}

impl AneesReport {
    pub fn inside(&self, step: usize) -> bool {
        let v = self.values[step];
        v >= self.lower && v <= self.upper
    }

    /// Pass fraction over the steps from `start` on.
    pub fn pass_fraction_from(&self, start: usize) -> f64 {
        let n = self.values.len().saturating_sub(start);
        if n == 0 {
            return 0.0;
        }
        (start..self.values.len()).filter(|&k| self.inside(k)).count() as f64 / n as f64
    }
}

/// ANEES from per-run NEES series.
pub fn anees_from_nees(nees_runs: &[Vec<f64>], n_x: usize, alpha: f64) -> Result<AneesReport> {
    let first = nees_runs.first().ok_or(Error::NoRuns)?;
    let steps = first.len();
    for (run, series) in nees_runs.iter().enumerate() {
        if series.len() != steps {
            return Err(Error::MisalignedRuns {
                run,
                got: series.len(),
                expected: steps,
            });
        }
    }
    let k = nees_runs.len();
    let values: Vec<f64> = (0..steps)
        .map(|s| nees_runs.iter().map(|r| r[s]).sum::<f64>() / k as f64)
        .collect();
    let (lower, upper) = anees_bounds(k, n_x, alpha)?;
    let mut report = AneesReport {
        values,
        lower,
        upper,
        runs: k,
        n_x,
        pass_fraction: 0.0,
    };
    report.pass_fraction = report.pass_fraction_from(0);
    Ok(report)
}

/// ANEES from per-run `(error, covariance)` series.
pub fn anees_series(
    runs: &[Vec<(DVector<f64>, DMatrix<f64>)>],
    alpha: f64,
) -> Result<AneesReport> {
    let first = runs.first().ok_or(Error::NoRuns)?;
    let n_x = first.first().map(|(e, _)| e.len()).unwrap_or(1);
    let nees_runs = runs
        .iter()
        .map(|run| run.iter().map(|(e, p)| nees(e, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    anees_from_nees(&nees_runs, n_x, alpha)
}
