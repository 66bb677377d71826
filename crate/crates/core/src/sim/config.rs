//! Scenario configuration and its flat `section.key = value` text format.
//!
//! ```text
//! # comment
//! sim.n_uavs = 3
//! sim.mode = swa
//! control.k_p = 0.5
//! sim.initial_positions = 0,0; 10,0; 5,8.66
//! ```
//!
//! Unknown keys are errors. `ScenarioConfig::to_resolved_string` writes every key,
//! including defaults, and parses back to an identical configuration.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;

use crate::belief::diag3_blocks;
use crate::control::ControlParams;
use crate::floating_frame::FrameParams;
use crate::focal_estimator::FocalParams;
use crate::geometry::Vec2;
use crate::surroundings::{SurroundingsParams, GATE_99_2DOF};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Relative-only estimation and formation control.
    Swa,
    /// Each UAV dead-reckons on its own IMU.
    StandaloneBaseline,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Swa => "swa",
            Mode::StandaloneBaseline => "standalone-baseline",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "swa" => Ok(Mode::Swa),
            "standalone-baseline" | "standalone" | "baseline" => Ok(Mode::StandaloneBaseline),
            other => Err(format!("unknown mode `{other}` (expected swa or standalone-baseline)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration")?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl ConfigError {
    pub fn mentions(&self, key: &str) -> bool {
        self.issues.iter().any(|i| i.key == key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    // sim
    pub n_uavs: usize,
    pub seed: u64,
    pub duration: f64,
    pub dt: f64,
    pub f_p: f64,
    pub f_a: f64,
    pub log_rate: f64,
    pub dropout_time: f64,
    /// Agent `i` drops out at `dropout_time + i·dropout_stagger`.
    pub dropout_stagger: f64,
    pub mode: Mode,
    pub ring_radius: f64,
    pub initial_positions: Vec<Vec2>,
    pub random_headings: bool,
    /// Plant time constant; `None` uses `focal_tau`.
    pub plant_tau: Option<f64>,
    // noise
    pub detection_sigma: f64,
    pub imu_tilt_sigma: f64,
    pub imu_bias_sigma: f64,
    // surroundings
    pub track_q_pos: f64,
    pub track_q_vel: f64,
    pub track_q_acc: f64,
    pub track_r: f64,
    pub stale_timeout: f64,
    pub track_init_vel_var: f64,
    pub track_init_acc_var: f64,
    pub outlier_gate: bool,
    // frame
    pub frame_radius: f64,
    pub frame_hold_timeout: f64,
    // focal
    pub focal_tau: f64,
    pub focal_q_pos: f64,
    pub focal_q_vel: f64,
    pub focal_q_acc: f64,
    pub focal_r_pos: f64,
    pub focal_r_acc: f64,
    pub tilt_gain: f64,
    pub focal_init_pos_var: f64,
    pub focal_init_vel_var: f64,
    pub focal_init_acc_var: f64,
    // control
    pub k_p: f64,
    pub k_v: f64,
    pub v_max: f64,
    pub neighbor_range: f64,
    pub neighbor_cap: usize,
    // metrics
    /// Seconds after dropout before metrics count as steady state.
    pub steady_after: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_uavs: 3,
            seed: 0,
            duration: 120.0,
            dt: 0.01,
            f_p: 10.0,
            f_a: 100.0,
            log_rate: 10.0,
            dropout_time: 10.0,
            dropout_stagger: 0.0,
            mode: Mode::Swa,
            ring_radius: 10.0,
            initial_positions: Vec::new(),
            random_headings: true,
            plant_tau: None,
            detection_sigma: 0.1,
            imu_tilt_sigma: 0.005,
            imu_bias_sigma: 0.05,
            track_q_pos: 1e-3,
            track_q_vel: 1e-2,
            track_q_acc: 1e-1,
            track_r: 0.1,
            stale_timeout: 2.0,
            track_init_vel_var: 1.0,
            track_init_acc_var: 1.0,
            outlier_gate: false,
            frame_radius: 10.0,
            frame_hold_timeout: 0.5,
            focal_tau: 2.8,
            focal_q_pos: 5e-2,
            focal_q_vel: 5e-1,
            focal_q_acc: 5.0,
            focal_r_pos: 2e-2,
            focal_r_acc: 2.25,
            tilt_gain: 6.35,
            focal_init_pos_var: 1.0,
            focal_init_vel_var: 1.0,
            focal_init_acc_var: 1.0,
            k_p: 0.5,
            k_v: 0.63,
            v_max: 7.0,
            neighbor_range: 50.0,
            neighbor_cap: 2,
            steady_after: 30.0,
        }
    }
}

fn parse_num<T: FromStr>(value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("cannot parse `{value}` as a number"))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("cannot parse `{other}` as a boolean")),
    }
}

fn parse_positions(value: &str) -> Result<Vec<Vec2>, String> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(';')
        .map(|pair| {
            let mut it = pair.split(',').map(str::trim);
            match (it.next(), it.next(), it.next()) {
                (Some(x), Some(y), None) => {
                    let p = Vec2::new(parse_num(x)?, parse_num(y)?);
                    if p.is_finite() {
                        Ok(p)
                    } else {
                        Err(format!("non-finite position `{pair}`"))
                    }
                }
                _ => Err(format!("expected `x,y` pairs separated by `;`, got `{pair}`")),
            }
        })
        .collect()
}

fn format_positions(ps: &[Vec2]) -> String {
    ps.iter()
        .map(|p| format!("{},{}", p.x, p.y))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Generates `get`/`set`/`KEYS` for the plain scalar keys.
macro_rules! scalar_keys {
    ($( $key:literal => $field:ident : $kind:ident ),* $(,)?) => {
        const SCALAR_KEYS: &[&str] = &[$($key),*];

        fn set_scalar(cfg: &mut ScenarioConfig, key: &str, value: &str) -> Option<Result<(), String>> {
            match key {
                $( $key => Some(scalar_keys!(@parse $kind, value).map(|v| cfg.$field = v)), )*
                _ => None,
            }
        }

        fn get_scalar(cfg: &ScenarioConfig, key: &str) -> Option<String> {
            match key {
                $( $key => Some(cfg.$field.to_string()), )*
                _ => None,
            }
        }
    };
    (@parse f64, $v:expr) => { parse_num::<f64>($v) };
    (@parse usize, $v:expr) => { parse_num::<usize>($v) };
    (@parse u64, $v:expr) => { parse_num::<u64>($v) };
    (@parse bool, $v:expr) => { parse_bool($v) };
    (@parse mode, $v:expr) => { $v.parse::<Mode>() };
}

scalar_keys! {
    "sim.n_uavs" => n_uavs: usize,
    "sim.seed" => seed: u64,
    "sim.duration" => duration: f64,
    "sim.dt" => dt: f64,
    "sim.f_p" => f_p: f64,
    "sim.f_a" => f_a: f64,
    "sim.log_rate" => log_rate: f64,
    "sim.dropout_time" => dropout_time: f64,
    "sim.dropout_stagger" => dropout_stagger: f64,
    "sim.mode" => mode: mode,
    "sim.ring_radius" => ring_radius: f64,
    "sim.random_headings" => random_headings: bool,
    "noise.detection_sigma" => detection_sigma: f64,
    "noise.imu_tilt_sigma" => imu_tilt_sigma: f64,
    "noise.imu_bias_sigma" => imu_bias_sigma: f64,
    "surroundings.q_pos" => track_q_pos: f64,
    "surroundings.q_vel" => track_q_vel: f64,
    "surroundings.q_acc" => track_q_acc: f64,
    "surroundings.r_meas" => track_r: f64,
    "surroundings.stale_timeout" => stale_timeout: f64,
    "surroundings.init_vel_var" => track_init_vel_var: f64,
    "surroundings.init_acc_var" => track_init_acc_var: f64,
    "surroundings.outlier_gate" => outlier_gate: bool,
    "frame.radius" => frame_radius: f64,
    "frame.hold_timeout" => frame_hold_timeout: f64,
    "focal.tau" => focal_tau: f64,
    "focal.q_pos" => focal_q_pos: f64,
    "focal.q_vel" => focal_q_vel: f64,
    "focal.q_acc" => focal_q_acc: f64,
    "focal.r_pos" => focal_r_pos: f64,
    "focal.r_acc" => focal_r_acc: f64,
    "focal.q_c" => tilt_gain: f64,
    "focal.init_pos_var" => focal_init_pos_var: f64,
    "focal.init_vel_var" => focal_init_vel_var: f64,
    "focal.init_acc_var" => focal_init_acc_var: f64,
    "control.k_p" => k_p: f64,
    "control.k_v" => k_v: f64,
    "control.v_max" => v_max: f64,
    "control.neighbor_range" => neighbor_range: f64,
    "control.neighbor_cap" => neighbor_cap: usize,
    "metrics.steady_after" => steady_after: f64,
}

const LIST_KEYS: &[&str] = &["sim.initial_positions", "sim.plant_tau"];

impl ScenarioConfig {
    /// Every recognised key, in resolved-output order.
    pub fn keys() -> Vec<&'static str> {
        let mut keys: Vec<&str> = SCALAR_KEYS.to_vec();
        keys.extend_from_slice(LIST_KEYS);
        keys
    }

    pub fn is_known_key(key: &str) -> bool {
        SCALAR_KEYS.contains(&key) || LIST_KEYS.contains(&key)
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigIssue> {
        let value = value.trim();
        let issue = |message: String| ConfigIssue {
            key: key.to_string(),
            message,
        };
        if let Some(res) = set_scalar(self, key, value) {
            return res.map_err(issue);
        }
        match key {
            "sim.initial_positions" => {
                self.initial_positions = parse_positions(value).map_err(issue)?;
                Ok(())
            }
            "sim.plant_tau" => {
                self.plant_tau = if value == "auto" {
                    None
                } else {
                    Some(parse_num(value).map_err(issue)?)
                };
                Ok(())
            }
            _ => Err(issue("unknown key".into())),
        }
    }

    pub fn get(&self, key: &str) -> Option<String> {
        if let Some(v) = get_scalar(self, key) {
            return Some(v);
        }
        match key {
            "sim.initial_positions" => Some(format_positions(&self.initial_positions)),
            "sim.plant_tau" => Some(
                self.plant_tau
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "auto".into()),
            ),
            _ => None,
        }
    }

    /// Parses config text on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut issues = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                issues.push(ConfigIssue {
                    key: format!("line {}", lineno + 1),
                    message: format!("expected `key = value`, got `{line}`"),
                });
                continue;
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                issues.push(ConfigIssue {
                    key: key.to_string(),
                    message: format!("duplicate key on line {}", lineno + 1),
                });
                continue;
            }
            if let Err(issue) = cfg.set(key, value) {
                issues.push(issue);
            }
        }
        if !issues.is_empty() {
            return Err(ConfigError { issues });
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Full parameter set, one `key = value` line per key.
    pub fn to_resolved_string(&self) -> String {
        let mut out = String::new();
        for key in Self::keys() {
            let value = self.get(key).unwrap_or_default();
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }

    fn period_steps(&self, rate: f64) -> Option<usize> {
        let steps = 1.0 / (rate * self.dt);
        let rounded = steps.round();
        ((steps - rounded).abs() < 1e-6 && rounded >= 1.0).then_some(rounded as usize)
    }

    /// Steps between relative detections.
    pub fn detection_period(&self) -> usize {
        self.period_steps(self.f_p).unwrap_or(1)
    }

    pub fn imu_period(&self) -> usize {
        self.period_steps(self.f_a).unwrap_or(1)
    }

    pub fn log_period(&self) -> usize {
        self.period_steps(self.log_rate).unwrap_or(1)
    }

    pub fn total_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn plant_time_constant(&self) -> f64 {
        self.plant_tau.unwrap_or(self.focal_tau)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut check = |ok: bool, key: &str, message: &str| {
            if !ok {
                issues.push(ConfigIssue {
                    key: key.to_string(),
                    message: message.to_string(),
                });
            }
        };
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;

        check(self.n_uavs >= 1, "sim.n_uavs", "must be at least 1");
        check(pos(self.dt), "sim.dt", "must be positive");
        check(nonneg(self.duration), "sim.duration", "must be non-negative");
        check(nonneg(self.dropout_time), "sim.dropout_time", "must be non-negative");
        check(nonneg(self.dropout_stagger), "sim.dropout_stagger", "must be non-negative");
        for (key, rate) in [("sim.f_p", self.f_p), ("sim.f_a", self.f_a), ("sim.log_rate", self.log_rate)] {
            check(
                pos(rate) && pos(self.dt) && self.period_steps(rate).is_some(),
                key,
                "period must be a whole multiple of sim.dt",
            );
        }
        if self.initial_positions.is_empty() {
            check(
                self.n_uavs <= 1 || pos(self.ring_radius),
                "sim.ring_radius",
                "must be positive",
            );
        } else {
            check(
                self.initial_positions.len() == self.n_uavs,
                "sim.initial_positions",
                "needs exactly sim.n_uavs positions",
            );
        }
        if let Some(t) = self.plant_tau {
            check(pos(t), "sim.plant_tau", "must be positive or `auto`");
        }
        check(nonneg(self.detection_sigma), "noise.detection_sigma", "must be non-negative");
        check(nonneg(self.imu_tilt_sigma), "noise.imu_tilt_sigma", "must be non-negative");
        check(nonneg(self.imu_bias_sigma), "noise.imu_bias_sigma", "must be non-negative");
        check(nonneg(self.track_q_pos), "surroundings.q_pos", "must be non-negative");
        check(nonneg(self.track_q_vel), "surroundings.q_vel", "must be non-negative");
        check(nonneg(self.track_q_acc), "surroundings.q_acc", "must be non-negative");
        check(pos(self.track_r), "surroundings.r_meas", "must be positive");
        check(pos(self.stale_timeout), "surroundings.stale_timeout", "must be positive");
        check(pos(self.track_init_vel_var), "surroundings.init_vel_var", "must be positive");
        check(pos(self.track_init_acc_var), "surroundings.init_acc_var", "must be positive");
        check(pos(self.frame_radius), "frame.radius", "must be positive");
        check(nonneg(self.frame_hold_timeout), "frame.hold_timeout", "must be non-negative");
        check(pos(self.focal_tau), "focal.tau", "must be positive");
        check(nonneg(self.focal_q_pos), "focal.q_pos", "must be non-negative");
        check(nonneg(self.focal_q_vel), "focal.q_vel", "must be non-negative");
        check(nonneg(self.focal_q_acc), "focal.q_acc", "must be non-negative");
        check(pos(self.focal_r_pos), "focal.r_pos", "must be positive");
        check(pos(self.focal_r_acc), "focal.r_acc", "must be positive");
        check(pos(self.tilt_gain), "focal.q_c", "must be positive");
        check(pos(self.focal_init_pos_var), "focal.init_pos_var", "must be positive");
        check(pos(self.focal_init_vel_var), "focal.init_vel_var", "must be positive");
        check(pos(self.focal_init_acc_var), "focal.init_acc_var", "must be positive");
        check(pos(self.k_p), "control.k_p", "must be positive");
        check(pos(self.k_v), "control.k_v", "must be positive");
        check(pos(self.v_max), "control.v_max", "must be positive");
        check(pos(self.neighbor_range), "control.neighbor_range", "must be positive");
        check(self.neighbor_cap >= 1, "control.neighbor_cap", "must be at least 1");
        check(nonneg(self.steady_after), "metrics.steady_after", "must be non-negative");

        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { issues })
        }
    }

    pub fn surroundings_params(&self) -> SurroundingsParams {
        SurroundingsParams {
            process_noise: diag3_blocks(self.track_q_pos, self.track_q_vel, self.track_q_acc),
            measurement_noise: Matrix2::identity() * self.track_r,
            stale_timeout: self.stale_timeout,
            initial_velocity_var: self.track_init_vel_var,
            initial_acceleration_var: self.track_init_acc_var,
            outlier_gate: self.outlier_gate.then_some(GATE_99_2DOF),
        }
    }

    pub fn frame_params(&self) -> FrameParams {
        FrameParams {
            radius: self.frame_radius,
        }
    }

    pub fn focal_params(&self) -> FocalParams {
        FocalParams {
            tau: self.focal_tau,
            process_noise: diag3_blocks(self.focal_q_pos, self.focal_q_vel, self.focal_q_acc),
            position_noise: Matrix2::identity() * self.focal_r_pos,
            acceleration_noise: Matrix2::identity() * self.focal_r_acc,
            tilt_gain: self.tilt_gain,
            initial_cov: diag3_blocks(
                self.focal_init_pos_var,
                self.focal_init_vel_var,
                self.focal_init_acc_var,
            ),
        }
    }

    pub fn control_params(&self) -> ControlParams {
        ControlParams {
            k_p: self.k_p,
            k_v: self.k_v,
            v_max: self.v_max,
            neighbor_range: self.neighbor_range,
            neighbor_cap: self.neighbor_cap,
        }
    }

    /// Initial world positions: explicit list or a ring around the origin.
    pub fn resolved_initial_positions(&self) -> Vec<Vec2> {
        if !self.initial_positions.is_empty() {
            return self.initial_positions.clone();
        }
        let n = self.n_uavs;
        if n == 1 {
            return vec![Vec2::ZERO];
        }
        (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                Vec2::new(a.cos(), a.sin()) * self.ring_radius
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn parse_overrides_and_comments() {
        let cfg = ScenarioConfig::parse(
            "# a comment\nsim.n_uavs = 4\n\ncontrol.k_p = 0.25 # trailing\nsim.mode = standalone-baseline\n",
        )
        .unwrap();
        assert_eq!(cfg.n_uavs, 4);
        assert_eq!(cfg.k_p, 0.25);
        assert_eq!(cfg.mode, Mode::StandaloneBaseline);
        assert_eq!(cfg.k_v, 0.63);
    }

    #[test]
    fn unknown_key_is_error() {
        let err = ScenarioConfig::parse("sim.n_uav = 3\n").unwrap_err();
        assert!(err.mentions("sim.n_uav"));
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn zero_uavs_names_the_key() {
        let err = ScenarioConfig::parse("sim.n_uavs = 0").unwrap_err();
        assert!(err.mentions("sim.n_uavs"));
        assert!(err.to_string().contains("sim.n_uavs"));
    }

    #[test]
    fn bad_values_reported_together() {
        let err = ScenarioConfig::parse("sim.dt = abc\ncontrol.k_v = -1\nsim.mode = fly\n").unwrap_err();
        assert!(err.mentions("sim.dt"));
        assert!(err.mentions("sim.mode"));
        let err = ScenarioConfig::parse("control.k_v = -1\nsim.f_p = 7\n").unwrap_err();
        assert!(err.mentions("control.k_v"));
        assert!(err.mentions("sim.f_p"));
    }

    #[test]
    fn duplicate_and_malformed_lines() {
        let err = ScenarioConfig::parse("sim.seed = 1\nsim.seed = 2\n").unwrap_err();
        assert!(err.mentions("sim.seed"));
        let err = ScenarioConfig::parse("just words\n").unwrap_err();
        assert!(err.mentions("line 1"));
    }

    #[test]
    fn positions_parse_and_count_checked() {
        let cfg = ScenarioConfig::parse("sim.n_uavs = 2\nsim.initial_positions = 0,0; 10.5,-3\n").unwrap();
        assert_eq!(cfg.initial_positions, vec![Vec2::ZERO, Vec2::new(10.5, -3.0)]);
        let err = ScenarioConfig::parse("sim.n_uavs = 3\nsim.initial_positions = 0,0; 1,1\n").unwrap_err();
        assert!(err.mentions("sim.initial_positions"));
        assert!(ScenarioConfig::parse("sim.initial_positions = 0,0,0").is_err());
    }

    #[test]
    fn resolved_round_trip() {
        let mut cfg = ScenarioConfig::default();
        cfg.seed = 987_654_321_012;
        cfg.k_p = 0.1 + 0.2;
        cfg.plant_tau = Some(3.1);
        cfg.n_uavs = 2;
        cfg.initial_positions = vec![Vec2::new(1.0 / 3.0, -2.0), Vec2::new(7.0, 1e-9)];
        let text = cfg.to_resolved_string();
        assert_eq!(ScenarioConfig::parse(&text).unwrap(), cfg);
        for key in ScenarioConfig::keys() {
            assert!(text.contains(&format!("{key} = ")));
        }
    }

    #[test]
    fn periods() {
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.detection_period(), 10);
        assert_eq!(cfg.imu_period(), 1);
        assert_eq!(cfg.log_period(), 10);
        assert_eq!(cfg.total_steps(), 12_000);
    }

    #[test]
    fn ring_placement() {
        let cfg = ScenarioConfig::default();
        let ps = cfg.resolved_initial_positions();
        assert_eq!(ps.len(), 3);
        for p in &ps {
            assert!((p.norm() - 10.0).abs() < 1e-12);
        }
    }
}
