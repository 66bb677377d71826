//! True planar kinematics and sensor synthesis.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{rotate_stable_to_body, Rot2, Vec2};
use crate::focal_estimator::ImuSample;

/// World-frame state of one simulated UAV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavTruth {
    pub position: Vec2,
    pub velocity: Vec2,
    pub commanded_velocity: Vec2,
    /// Acceleration over the last integration step.
    pub acceleration: Vec2,
    /// Constant accelerometer-equivalent bias (m/s²).
    pub imu_bias: Vec2,
    /// Body-to-world heading ψ (rad).
    pub heading: f64,
}

impl UavTruth {
    pub fn at_rest(position: Vec2, heading: f64, imu_bias: Vec2) -> Self {
        Self {
            position,
            velocity: Vec2::ZERO,
            commanded_velocity: Vec2::ZERO,
            acceleration: Vec2::ZERO,
            imu_bias,
            heading,
        }
    }
}

/// First-order velocity response toward `v_cmd`, then Euler position update with
/// the new velocity.
pub fn step_truth(truth: &UavTruth, v_cmd: Vec2, dt: f64, tau: f64) -> UavTruth {
    let e_d = (-dt / tau).exp();
    let velocity = truth.velocity * e_d + v_cmd * (1.0 - e_d);
    UavTruth {
        position: truth.position + velocity * dt,
        velocity,
        commanded_velocity: v_cmd,
        acceleration: (velocity - truth.velocity) * (1.0 / dt),
        ..*truth
    }
}

fn gaussian2<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Vec2 {
    if sigma == 0.0 {
        return Vec2::ZERO;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated as finite and non-negative");
    Vec2::new(normal.sample(rng), normal.sample(rng))
}

/// Relative position of `target` seen from `observer`, in the observer's body frame,
/// with isotropic Gaussian noise.
pub fn emit_relative_detection<R: Rng + ?Sized>(
    observer: &UavTruth,
    target: &UavTruth,
    rng: &mut R,
    sigma: f64,
) -> Vec2 {
    let rel = target.position - observer.position;
    rotate_stable_to_body(rel, Rot2::from_angle(observer.heading)) + gaussian2(rng, sigma)
}

/// Tilt sample whose implied acceleration is the true acceleration plus bias, with
/// Gaussian tilt noise.
pub fn emit_imu_sample<R: Rng + ?Sized>(
    truth: &UavTruth,
    rng: &mut R,
    tilt_gain: f64,
    tilt_sigma: f64,
    stamp: f64,
) -> ImuSample {
    let a = truth.acceleration + truth.imu_bias;
    let tilt = Rot2::from_angle(truth.heading).rotate_transposed(a) * (1.0 / tilt_gain)
        + gaussian2(rng, tilt_sigma);
    ImuSample {
        pitch: tilt.x,
        roll: tilt.y,
        heading: truth.heading,
        stamp,
    }
}

/// Per-agent constant IMU bias.
pub fn draw_bias<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Vec2 {
    gaussian2(rng, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focal_estimator::tilt_to_acceleration;
    use crate::sim::rng::{rng_stream, Channel};
    use crate::surroundings::{AgentId, SurroundingsParams, TrackBank};
    use std::f64::consts::FRAC_PI_2;

    fn at(x: f64, y: f64, heading: f64) -> UavTruth {
        UavTruth::at_rest(Vec2::new(x, y), heading, Vec2::ZERO)
    }

    #[test]
    fn step_examples() {
        let s = step_truth(&at(0.0, 0.0, 0.0), Vec2::new(1.0, 0.0), 0.01, 2.8);
        assert!((s.velocity.x - (1.0 - (-0.01f64 / 2.8).exp())).abs() < 1e-15);
        assert!((s.velocity.x - 0.003565).abs() < 1e-6);
        assert_eq!(s.velocity.y, 0.0);
        assert_eq!(s.position.x, s.velocity.x * 0.01);

        let mut moving = at(0.0, 0.0, 0.0);
        moving.velocity = Vec2::new(2.0, -1.0);
        let s = step_truth(&moving, moving.velocity, 0.01, 2.8);
        assert_eq!(s.velocity, moving.velocity);

        let e_d = (-0.01f64 / 2.8).exp();
        let mut s = moving;
        for k in 1..=50 {
            s = step_truth(&s, Vec2::ZERO, 0.01, 2.8);
            let expect = 2.0 * e_d.powi(k);
            assert!((s.velocity.x - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn detection_examples() {
        let mut rng = rng_stream(0, 0, Channel::Detection);
        let z = emit_relative_detection(&at(0.0, 0.0, 0.0), &at(10.0, 0.0, 0.0), &mut rng, 0.0);
        assert_eq!(z, Vec2::new(10.0, 0.0));

        let observer = at(0.0, 0.0, FRAC_PI_2);
        let z = emit_relative_detection(&observer, &at(10.0, 0.0, 0.0), &mut rng, 0.0);
        let mut bank = TrackBank::new();
        let params = SurroundingsParams::default();
        bank.ingest(AgentId(1), z, observer.heading, 0.0, &params).unwrap();
        let rec = bank.get(AgentId(1)).unwrap().position();
        assert!((rec - Vec2::new(10.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn detection_noise_mean() {
        let mut rng = rng_stream(3, 1, Channel::Detection);
        let (o, t) = (at(1.0, 2.0, 0.3), at(-4.0, 7.0, 1.1));
        let n = 10_000;
        let mean = (0..n).fold(Vec2::ZERO, |acc, _| acc + emit_relative_detection(&o, &t, &mut rng, 0.1))
            * (1.0 / n as f64);
        let exact = emit_relative_detection(&o, &t, &mut rng, 0.0);
        assert!((mean - exact).norm() < 0.01);
    }

    #[test]
    fn imu_examples() {
        let mut rng = rng_stream(0, 0, Channel::Imu);
        let mut t = at(0.0, 0.0, 0.0);
        t.acceleration = Vec2::new(0.635, 0.0);
        let s = emit_imu_sample(&t, &mut rng, 6.35, 0.0, 0.0);
        assert!((s.pitch - 0.1).abs() < 1e-15);
        assert_eq!(s.roll, 0.0);

        let s = emit_imu_sample(&at(0.0, 0.0, 0.7), &mut rng, 6.35, 0.0, 0.0);
        assert_eq!((s.pitch, s.roll), (0.0, 0.0));
    }

    #[test]
    fn imu_inverts_tilt_conversion() {
        let mut rng = rng_stream(0, 0, Channel::Imu);
        let mut t = at(0.0, 0.0, 2.1);
        t.acceleration = Vec2::new(-0.4, 1.3);
        t.imu_bias = Vec2::new(0.05, -0.02);
        let s = emit_imu_sample(&t, &mut rng, 6.35, 0.0, 0.0);
        let a = tilt_to_acceleration(&s, 6.35);
        assert!((a - (t.acceleration + t.imu_bias)).norm() < 1e-12);
    }

    #[test]
    fn biased_imu_long_run_mean() {
        let mut rng = rng_stream(9, 0, Channel::Imu);
        let mut t = at(0.0, 0.0, 0.0);
        t.acceleration = Vec2::new(0.635, 0.0);
        t.imu_bias = Vec2::new(0.1, 0.0);
        let n = 20_000;
        let mean = (0..n).fold(Vec2::ZERO, |acc, _| {
            acc + tilt_to_acceleration(&emit_imu_sample(&t, &mut rng, 6.35, 0.005, 0.0), 6.35)
        }) * (1.0 / n as f64);
        assert!((mean - Vec2::new(0.735, 0.0)).norm() < 0.01);
    }
}
