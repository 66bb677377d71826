use proptest::prelude::*;
use swa_core::control::{feedback, saturate};
use swa_core::sim::{step_truth, UavTruth};
use swa_core::{ControlParams, Vec2};

const TAU: f64 = 2.8;
const DT: f64 = 0.01;

/// Noise-free plant driven by the feedback law on the true frame-relative state.
/// Returns the position norm at every step.
fn settle(start: Vec2, seconds: f64) -> Vec<f64> {
    let params = ControlParams::default();
    let mut truth = UavTruth::at_rest(start, 0.0, Vec2::ZERO);
    (0..(seconds / DT) as usize)
        .map(|_| {
            let cmd = saturate(feedback(truth.position, truth.velocity, &params), params.v_max);
            truth = step_truth(&truth, cmd, DT, TAU);
            truth.position.norm()
        })
        .collect()
}

#[test]
fn offsets_within_twenty_metres_settle_within_a_minute() {
    for k in 0..36 {
        let angle = k as f64 * std::f64::consts::TAU / 36.0;
        for radius in [1.0, 5.0, 12.0, 20.0] {
            let trace = settle(Vec2::new(angle.cos(), angle.sin()) * radius, 60.0);
            let end = *trace.last().unwrap();
            assert!(end < 0.1, "start r={radius} angle={angle}: {end}");
        }
    }
}

#[test]
fn successive_peaks_decay() {
    let trace = settle(Vec2::new(20.0, 0.0), 60.0);
    let peaks: Vec<f64> = trace
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] >= w[2])
        .map(|w| w[1])
        .collect();
    assert!(!peaks.is_empty());
    for pair in peaks.windows(2) {
        assert!(pair[1] < pair[0], "peaks {pair:?}");
    }
    assert!(peaks[0] < 20.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn command_never_exceeds_limit(
        px in -100.0f64..100.0, py in -100.0f64..100.0,
        vx in -20.0f64..20.0, vy in -20.0f64..20.0,
    ) {
        let params = ControlParams::default();
        let cmd = saturate(feedback(Vec2::new(px, py), Vec2::new(vx, vy), &params), params.v_max);
        prop_assert!(cmd.norm() <= params.v_max + 1e-12);
    }
}
