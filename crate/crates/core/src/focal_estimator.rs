//! Lateral state estimator of the focal UAV.
//!
//! The state `[r, ṙ, r̈]` is the focal UAV's position, velocity and acceleration in
//! its floating frame. Prediction uses a constant-acceleration model whose velocity
//! block is damped by `e_d = exp(−Δt/τ)` and driven by the desired velocity through
//! `B_f = [0; (1 − e_d)·I; 0]`. Two asynchronous measurements correct it: the
//! negated floating-frame center (position block) and IMU tilt converted to
//! acceleration (acceleration block). A correction never uses both blocks at once.

use nalgebra::{Matrix2, Matrix2x6};

use crate::belief::{check_dt, diag3_blocks, kinematic_transition, Belief, Matrix6, Vector6};
use crate::error::{Error, Result};
use crate::floating_frame::FrameEstimate;
use crate::geometry::{Rot2, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct FocalParams {
    /// Velocity time constant τ (s).
    pub tau: f64,
    pub process_noise: Matrix6,
    /// `R_c`, noise of the floating-frame position measurement (m²).
    pub position_noise: Matrix2<f64>,
    /// `R_a`, noise of the tilt-derived acceleration (m²/s⁴).
    pub acceleration_noise: Matrix2<f64>,
    /// `q_c`, tilt-to-acceleration conversion ((m/s²)/rad).
    pub tilt_gain: f64,
    pub initial_cov: Matrix6,
}

impl Default for FocalParams {
    fn default() -> Self {
        Self {
            tau: 2.8,
            process_noise: diag3_blocks(5e-2, 5e-1, 5.0),
            position_noise: Matrix2::identity() * 2e-2,
            acceleration_noise: Matrix2::identity() * 2.25,
            tilt_gain: 6.35,
            initial_cov: diag3_blocks(1.0, 1.0, 1.0),
        }
    }
}

impl FocalParams {
    pub fn damping(&self, dt: f64) -> f64 {
        (-dt / self.tau).exp()
    }
}

/// Attitude sample from the IMU / attitude estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    pub pitch: f64,
    pub roll: f64,
    pub heading: f64,
    pub stamp: f64,
}

/// Lateral acceleration implied by the UAV tilt: `q_c · R(ψ) · [θ, φ]ᵀ`.
pub fn tilt_to_acceleration(imu: &ImuSample, tilt_gain: f64) -> Vec2 {
    Rot2::from_angle(imu.heading).rotate(Vec2::new(imu.pitch, imu.roll)) * tilt_gain
}

/// `H_f = [h_p·I₂ 0₂ h_a·I₂]` with `h_p, h_a ∈ {0, 1}` and `h_p ≠ h_a`.
pub fn observation_matrix(h_p: u8, h_a: u8) -> Result<Matrix2x6<f64>> {
    if h_p > 1 || h_a > 1 || h_p == h_a {
        return Err(Error::InvalidArgument(format!(
            "exactly one of h_p, h_a must be 1 (got h_p={h_p}, h_a={h_a})"
        )));
    }
    let mut h = Matrix2x6::zeros();
    let offset = if h_p == 1 { 0 } else { 4 };
    h[(0, offset)] = 1.0;
    h[(1, offset + 1)] = 1.0;
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocalBelief {
    pub belief: Belief<6>,
    pub stamp: f64,
}

impl FocalBelief {
    pub fn initial(params: &FocalParams, stamp: f64) -> Self {
        Self {
            belief: Belief::new(Vector6::zeros(), params.initial_cov),
            stamp,
        }
    }

    pub fn position(&self) -> Vec2 {
        self.belief.block(0).0
    }

    pub fn velocity(&self) -> Vec2 {
        self.belief.block(1).0
    }

    pub fn acceleration(&self) -> Vec2 {
        self.belief.block(2).0
    }

    /// Damped, input-driven prediction over `dt`.
    pub fn predict(&self, v_desired: Vec2, dt: f64, params: &FocalParams) -> Result<Self> {
        check_dt(dt)?;
        v_desired.ensure_finite("desired velocity")?;
        let e_d = params.damping(dt);
        let f = kinematic_transition(dt, e_d);
        let mut bu = Vector6::zeros();
        bu[2] = (1.0 - e_d) * v_desired.x;
        bu[3] = (1.0 - e_d) * v_desired.y;
        Ok(Self {
            belief: self.belief.predict(&f, Some(&bu), &params.process_noise),
            stamp: self.stamp + dt,
        })
    }

    /// Plain constant-acceleration prediction with no input model. This is the
    /// dead-reckoning estimator used by standalone UAVs without relative sensing.
    pub fn predict_dead_reckoning(&self, dt: f64, params: &FocalParams) -> Result<Self> {
        check_dt(dt)?;
        let f = kinematic_transition(dt, 1.0);
        Ok(Self {
            belief: self.belief.predict(&f, None, &params.process_noise),
            stamp: self.stamp + dt,
        })
    }

    fn correct_block(&self, h: Matrix2x6<f64>, z: Vec2, r: &Matrix2<f64>) -> Result<Self> {
        Ok(Self {
            belief: self.belief.correct(&h, &z.to_vector(), r)?,
            stamp: self.stamp,
        })
    }

    /// Position correction with `z = −r_c`.
    pub fn correct_position(&self, frame: &FrameEstimate, params: &FocalParams) -> Result<Self> {
        self.correct_position_measurement(-frame.center, params)
    }

    pub fn correct_position_measurement(&self, z: Vec2, params: &FocalParams) -> Result<Self> {
        z.ensure_finite("position measurement")?;
        self.correct_block(observation_matrix(1, 0)?, z, &params.position_noise)
    }

    /// Acceleration correction from one IMU tilt sample.
    pub fn correct_acceleration(&self, imu: &ImuSample, params: &FocalParams) -> Result<Self> {
        let z = tilt_to_acceleration(imu, params.tilt_gain);
        self.correct_acceleration_measurement(z, params)
    }

    pub fn correct_acceleration_measurement(&self, z: Vec2, params: &FocalParams) -> Result<Self> {
        z.ensure_finite("acceleration measurement")?;
        self.correct_block(observation_matrix(0, 1)?, z, &params.acceleration_noise)
    }
}

/// Which motion model drives the prediction step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionModel {
    /// Damped velocity with the desired velocity as input.
    InputDriven,
    /// Pure kinematic integration of the acceleration state.
    DeadReckoning,
}

/// A measurement with its timestamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FocalEvent {
    Position { stamp: f64, frame: FrameEstimate },
    Acceleration(ImuSample),
}

impl FocalEvent {
    pub fn stamp(&self) -> f64 {
        match self {
            FocalEvent::Position { stamp, .. } => *stamp,
            FocalEvent::Acceleration(imu) => imu.stamp,
        }
    }

    fn order(&self) -> u8 {
        match self {
            FocalEvent::Position { .. } => 0,
            FocalEvent::Acceleration(_) => 1,
        }
    }
}

/// Focal estimator with asynchronous, event-ordered corrections.
#[derive(Debug, Clone)]
pub struct FocalEstimator {
    pub state: FocalBelief,
    pub params: FocalParams,
    pub model: PredictionModel,
}

impl FocalEstimator {
    pub fn new(params: FocalParams, model: PredictionModel, stamp: f64) -> Self {
        Self {
            state: FocalBelief::initial(&params, stamp),
            params,
            model,
        }
    }

    /// Predicts up to time `t` with the desired velocity held over the interval.
    /// A `t` at or before the current stamp is a no-op.
    pub fn predict_to(&mut self, t: f64, v_desired: Vec2) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::NonFinite("prediction time"));
        }
        let dt = t - self.state.stamp;
        if dt <= 0.0 {
            return Ok(());
        }
        let next = match self.model {
            PredictionModel::InputDriven => self.state.predict(v_desired, dt, &self.params)?,
            PredictionModel::DeadReckoning => self.state.predict_dead_reckoning(dt, &self.params)?,
        };
        self.state = FocalBelief { stamp: t, ..next };
        Ok(())
    }

    /// Predicts to the event stamp, then corrects.
    pub fn apply(&mut self, event: &FocalEvent, v_desired: Vec2) -> Result<()> {
        self.predict_to(event.stamp(), v_desired)?;
        self.state = match event {
            FocalEvent::Position { frame, .. } => self.state.correct_position(frame, &self.params)?,
            FocalEvent::Acceleration(imu) => self.state.correct_acceleration(imu, &self.params)?,
        };
        Ok(())
    }

    /// Applies events in time order; simultaneous events go position first.
    pub fn apply_all(&mut self, events: &[FocalEvent], v_desired: Vec2) -> Result<()> {
        let mut ordered: Vec<&FocalEvent> = events.iter().collect();
        ordered.sort_by(|a, b| {
            a.stamp()
                .total_cmp(&b.stamp())
                .then(a.order().cmp(&b.order()))
        });
        for ev in ordered {
            self.apply(ev, v_desired)?;
        }
        Ok(())
    }
}
