//! Fixtures shared by the benchmarks.

use swa_core::sim::ScenarioConfig;
use swa_core::Vec2;

/// `m` points evenly spaced on a circle of radius `r` about `center`, each pushed
/// radially by a small deterministic wobble so the fit is not exact.
pub fn circle_points(center: Vec2, r: f64, m: usize) -> Vec<Vec2> {
    (0..m)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / m as f64;
            let wobble = 0.05 * (3.0 * a).sin();
            center + Vec2::new(a.cos(), a.sin()) * (r + wobble)
        })
        .collect()
}

/// A short swa scenario: `n` UAVs, 20 s, dropout at 5 s.
pub fn short_scenario(n: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.n_uavs = n;
    cfg.duration = 20.0;
    cfg.dropout_time = 5.0;
    cfg
}
