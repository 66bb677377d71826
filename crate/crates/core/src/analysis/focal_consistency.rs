//! Monte-Carlo consistency check of the focal estimator against truths drawn from
//! its own motion and measurement model.

use nalgebra::{Cholesky, DMatrix, DVector, Matrix2};
use rand_distr::{Distribution, StandardNormal};

use crate::analysis::consistency::{anees_series, AneesReport};
use crate::belief::{kinematic_transition, Matrix6, Vector6};
use crate::error::{Error, Result};
use crate::focal_estimator::{FocalBelief, FocalParams};
use crate::geometry::Vec2;
use crate::sim::rng::{rng_stream, Channel, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct FocalConsistencyConfig {
    pub runs: usize,
    pub duration: f64,
    pub dt: f64,
    pub f_p: f64,
    pub f_a: f64,
    /// Steps before this time are excluded from the pass fraction (s).
    pub settle: f64,
    pub alpha: f64,
    pub seed: u64,
    pub params: FocalParams,
}

impl Default for FocalConsistencyConfig {
    fn default() -> Self {
        Self {
            runs: 12,
            duration: 60.0,
            dt: 0.01,
            f_p: 10.0,
            f_a: 100.0,
            settle: 5.0,
            alpha: 0.05,
            seed: 0,
            params: FocalParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocalConsistencyReport {
    /// Evaluation times, one per position update.
    pub times: Vec<f64>,
    pub position: AneesReport,
    pub velocity: AneesReport,
    /// First index at or after `settle`.
    pub steady_from: usize,
}

impl FocalConsistencyReport {
    pub fn position_pass_fraction(&self) -> f64 {
        self.position.pass_fraction_from(self.steady_from)
    }

    pub fn velocity_pass_fraction(&self) -> f64 {
        self.velocity.pass_fraction_from(self.steady_from)
    }
}

/// Commanded velocity of the synthetic runs: a slow Lissajous sweep.
fn desired_velocity(t: f64) -> Vec2 {
    Vec2::new(2.0 * (0.2 * t).sin(), 1.5 * (0.13 * t).cos())
}

fn gaussian<const N: usize>(rng: &mut SimRng) -> nalgebra::SVector<f64, N> {
    nalgebra::SVector::from_fn(|_, _| StandardNormal.sample(rng))
}

fn sqrt_factor(m: &Matrix6) -> Result<Matrix6> {
    Cholesky::new(*m)
        .map(|c| c.l())
        .ok_or(Error::SingularCovariance)
}

fn sqrt_factor2(m: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    Cholesky::new(*m)
        .map(|c| c.l())
        .ok_or(Error::SingularCovariance)
}

type Sample = (DVector<f64>, DMatrix<f64>);

fn marginal(truth: &Vector6, est: &FocalBelief, block: usize) -> Sample {
    let (mean, cov) = est.belief.block(block);
    let i = 2 * block;
    let e = DVector::from_vec(vec![mean.x - truth[i], mean.y - truth[i + 1]]);
    (e, DMatrix::from_iterator(2, 2, cov.iter().copied()))
}

fn period(rate: f64, dt: f64) -> Result<usize> {
    let steps = (1.0 / (rate * dt)).round();
    if steps < 1.0 || ((1.0 / (rate * dt)) - steps).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "rate {rate} Hz is not a whole number of {dt} s steps"
        )));
    }
    Ok(steps as usize)
}

/// Runs `runs` independent truth/filter pairs and the position and velocity ANEES.
///
/// Each truth starts from a draw of the initial covariance, evolves with the
/// filter's damped transition, input and process noise, and is observed with the
/// filter's position and acceleration noise. NEES is taken right after every
/// position update.
pub fn run_focal_consistency(cfg: &FocalConsistencyConfig) -> Result<FocalConsistencyReport> {
    if cfg.runs == 0 {
        return Err(Error::NoRuns);
    }
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        return Err(Error::InvalidTimeStep(cfg.dt));
    }
    let p = &cfg.params;
    let pos_period = period(cfg.f_p, cfg.dt)?;
    let acc_period = period(cfg.f_a, cfg.dt)?;
    let steps = (cfg.duration / cfg.dt).round() as usize;
    let e_d = p.damping(cfg.dt);
    let f = kinematic_transition(cfg.dt, e_d);
    let q_sqrt = sqrt_factor(&p.process_noise)?;
    let p0_sqrt = sqrt_factor(&p.initial_cov)?;
    let rc_sqrt = sqrt_factor2(&p.position_noise)?;
    let ra_sqrt = sqrt_factor2(&p.acceleration_noise)?;

    let mut times = Vec::new();
    let mut pos_runs = Vec::with_capacity(cfg.runs);
    let mut vel_runs = Vec::with_capacity(cfg.runs);
    for run in 0..cfg.runs {
        let mut process_rng = rng_stream(cfg.seed, run, Channel::Synthetic);
        let mut meas_rng = rng_stream(cfg.seed, run, Channel::Measurement);
        let mut truth: Vector6 = p0_sqrt * gaussian::<6>(&mut process_rng);
        let mut est = FocalBelief::initial(p, 0.0);
        let mut pos_samples = Vec::new();
        let mut vel_samples = Vec::new();

        for k in 1..=steps {
            let t_prev = (k - 1) as f64 * cfg.dt;
            let u = desired_velocity(t_prev);
            let mut bu = Vector6::zeros();
            bu[2] = (1.0 - e_d) * u.x;
            bu[3] = (1.0 - e_d) * u.y;
            truth = f * truth + bu + q_sqrt * gaussian::<6>(&mut process_rng);
            est = est.predict(u, cfg.dt, p)?;

            if k % pos_period == 0 {
                let z = rc_sqrt * gaussian::<2>(&mut meas_rng) + truth.fixed_rows::<2>(0);
                est = est.correct_position_measurement(Vec2::from(z), p)?;
            }
            if k % acc_period == 0 {
                let z = ra_sqrt * gaussian::<2>(&mut meas_rng) + truth.fixed_rows::<2>(4);
                est = est.correct_acceleration_measurement(Vec2::from(z), p)?;
            }
            if k % pos_period == 0 {
                if run == 0 {
                    times.push(k as f64 * cfg.dt);
                }
                pos_samples.push(marginal(&truth, &est, 0));
                vel_samples.push(marginal(&truth, &est, 1));
            }
        }
        pos_runs.push(pos_samples);
        vel_runs.push(vel_samples);
    }

    let steady_from = times
        .iter()
        .position(|&t| t >= cfg.settle)
        .unwrap_or(times.len());
    Ok(FocalConsistencyReport {
        times,
        position: anees_series(&pos_runs, cfg.alpha)?,
        velocity: anees_series(&vel_runs, cfg.alpha)?,
        steady_from,
    })
}
