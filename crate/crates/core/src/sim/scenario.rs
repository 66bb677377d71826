//! Fixed-step swarm scenario: every UAV runs its own full estimation and control
//! stack on synthesized sensor data.
//!
//! Each step runs truth integration, then sensor emission, then per-agent
//! estimation, then control. Before its dropout a UAV holds its start position
//! using the true state.

use rand::Rng;

use crate::analysis::metrics::{metric_neighbor_distance, neighbor_pairs};
use crate::control::{compute_velocity_command, feedback, saturate, select_nearest, select_neighborhood};
use crate::error::Error;
use crate::floating_frame::{estimate_frame, FrameDecision};
use crate::focal_estimator::{FocalEstimator, ImuSample, PredictionModel};
use crate::geometry::Vec2;
use crate::sim::config::{ConfigError, Mode, ScenarioConfig};
use crate::sim::log::{LogRow, SimCounters, SimLog, UavRecord};
use crate::sim::rng::{rng_stream, Channel, SimRng};
use crate::sim::truth::{draw_bias, emit_imu_sample, emit_relative_detection, step_truth, UavTruth};
use crate::surroundings::{AgentId, TrackBank};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step {step} (t = {time} s), UAV {agent}: {source}")]
    Step {
        step: usize,
        time: f64,
        agent: usize,
        source: Error,
    },
}

const NAN2: Vec2 = Vec2 {
    x: f64::NAN,
    y: f64::NAN,
};

struct Agent {
    bank: TrackBank,
    focal: Option<FocalEstimator>,
    activation_step: usize,
    /// Time of the last successful frame fit, or of activation.
    last_frame_time: f64,
    frame_center: Vec2,
    command: Vec2,
    home: Vec2,
    detection_rng: SimRng,
    imu_rng: SimRng,
}

/// Runs one scenario to completion.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimLog, SimError> {
    config.validate()?;
    let n = config.n_uavs;
    let dt = config.dt;
    let plant_tau = config.plant_time_constant();
    let surroundings = config.surroundings_params();
    let frame_params = config.frame_params();
    let focal_params = config.focal_params();
    let control = config.control_params();

    let starts = config.resolved_initial_positions();
    let mut truth: Vec<UavTruth> = starts
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let heading = if config.random_headings {
                rng_stream(config.seed, i, Channel::Heading)
                    .random_range(-std::f64::consts::PI..std::f64::consts::PI)
            } else {
                0.0
            };
            let bias = draw_bias(&mut rng_stream(config.seed, i, Channel::Bias), config.imu_bias_sigma);
            UavTruth::at_rest(p, heading, bias)
        })
        .collect();
    let mut agents: Vec<Agent> = (0..n)
        .map(|i| Agent {
            bank: TrackBank::new(),
            focal: None,
            activation_step: ((config.dropout_time + i as f64 * config.dropout_stagger) / dt).round()
                as usize,
            last_frame_time: 0.0,
            frame_center: NAN2,
            command: Vec2::ZERO,
            home: starts[i],
            detection_rng: rng_stream(config.seed, i, Channel::Detection),
            imu_rng: rng_stream(config.seed, i, Channel::Imu),
        })
        .collect();
    let pairs = neighbor_pairs(&starts, &control);

    let det_period = config.detection_period();
    let imu_period = config.imu_period();
    let log_period = config.log_period();
    let total = config.total_steps();
    let mut counters = SimCounters::default();
    let mut rows = Vec::with_capacity(total / log_period + 1);
    let model = match config.mode {
        Mode::Swa => PredictionModel::InputDriven,
        Mode::StandaloneBaseline => PredictionModel::DeadReckoning,
    };

    rows.push(log_row(0.0, &truth, &agents, &pairs, config));

    let mut detections: Vec<Vec<(AgentId, Vec2)>> = vec![Vec::new(); n];
    let mut imu: Vec<Option<ImuSample>> = vec![None; n];
    for step in 1..=total {
        let t = step as f64 * dt;

        for (tr, ag) in truth.iter_mut().zip(&agents) {
            *tr = step_truth(tr, ag.command, dt, plant_tau);
        }

        let detect = step % det_period == 0;
        for i in 0..n {
            detections[i].clear();
            if detect {
                for j in (0..n).filter(|&j| j != i) {
                    let z = emit_relative_detection(
                        &truth[i],
                        &truth[j],
                        &mut agents[i].detection_rng,
                        config.detection_sigma,
                    );
                    detections[i].push((AgentId(j), z));
                }
            }
            imu[i] = (step % imu_period == 0).then(|| {
                emit_imu_sample(
                    &truth[i],
                    &mut agents[i].imu_rng,
                    config.tilt_gain,
                    config.imu_tilt_sigma,
                    t,
                )
            });
        }

        for (i, agent) in agents.iter_mut().enumerate() {
            let fail = |source| SimError::Step {
                step,
                time: t,
                agent: i,
                source,
            };
            for &(id, z) in &detections[i] {
                agent
                    .bank
                    .ingest(id, z, truth[i].heading, t, &surroundings)
                    .map_err(fail)?;
            }
            if detect {
                agent.bank.prune_stale(t, &surroundings);
            }

            if step < agent.activation_step {
                let offset = truth[i].position - agent.home;
                agent.command = saturate(feedback(offset, truth[i].velocity, &control), control.v_max);
                continue;
            }
            let focal = agent.focal.get_or_insert_with(|| FocalEstimator::new(focal_params.clone(), model, t));
            if agent.activation_step == step {
                agent.last_frame_time = t;
            }
            focal.predict_to(t, agent.command).map_err(fail)?;

            if detect && config.mode == Mode::Swa {
                let neighbors: Vec<Vec2> = select_neighborhood(agent.bank.tracks(), &control)
                    .iter()
                    .map(|tr| tr.position())
                    .collect();
                match estimate_frame(&neighbors, Vec2::ZERO, &frame_params) {
                    Ok(FrameDecision::Fresh(frame)) => {
                        focal.state = focal.state.correct_position(&frame, &focal.params).map_err(fail)?;
                        agent.frame_center = frame.center;
                        agent.last_frame_time = t;
                        counters.frame_fits += 1;
                    }
                    Ok(FrameDecision::HoldLast) => counters.frame_holds += 1,
                    Err(_) => counters.frame_failures += 1,
                }
            }
            if let Some(sample) = &imu[i] {
                focal.state = focal.state.correct_acceleration(sample, &focal.params).map_err(fail)?;
            }

            let lost = config.mode == Mode::Swa && t - agent.last_frame_time > config.frame_hold_timeout + 1e-9;
            agent.command = if lost {
                Vec2::ZERO
            } else {
                compute_velocity_command(&focal.state, &control)
            };
        }

        if step % log_period == 0 {
            rows.push(log_row(t, &truth, &agents, &pairs, config));
        }
    }

    for agent in &agents {
        counters.out_of_order += agent.bank.out_of_order_count();
        counters.gated += agent.bank.gated_count();
    }
    let mut log = SimLog {
        n_uavs: n,
        pairs,
        rows,
        counters,
    };
    log.fill_drift();
    Ok(log)
}

/// True position of UAV `i` in its estimation frame: the negated floating-frame
/// center fitted to noise-free relative positions (swa), or the offset from the
/// start position (standalone).
fn true_frame_position(i: usize, truth: &[UavTruth], home: Vec2, config: &ScenarioConfig) -> Vec2 {
    match config.mode {
        Mode::StandaloneBaseline => truth[i].position - home,
        Mode::Swa => {
            let rel: Vec<(usize, Vec2)> = truth
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, tr)| (j, tr.position - truth[i].position))
                .collect();
            let neighbors: Vec<Vec2> = select_nearest(&rel, &config.control_params())
                .into_iter()
                .map(|k| rel[k].1)
                .collect();
            match estimate_frame(&neighbors, Vec2::ZERO, &config.frame_params()) {
                Ok(FrameDecision::Fresh(f)) => -f.center,
                _ => NAN2,
            }
        }
    }
}

fn log_row(t: f64, truth: &[UavTruth], agents: &[Agent], pairs: &[(usize, usize)], config: &ScenarioConfig) -> LogRow {
    let uavs = agents
        .iter()
        .enumerate()
        .map(|(i, ag)| {
            let true_frame = true_frame_position(i, truth, ag.home, config);
            let (est_position, est_velocity, nees_position) = match &ag.focal {
                Some(f) => {
                    let (p, cov) = f.state.belief.block(0);
                    let e = p - true_frame;
                    let nees = cov
                        .try_inverse()
                        .map(|inv| {
                            let e = e.to_vector();
                            (e.transpose() * inv * e)[(0, 0)]
                        })
                        .unwrap_or(f64::NAN);
                    (p, f.state.velocity(), nees)
                }
                None => (NAN2, NAN2, f64::NAN),
            };
            UavRecord {
                position: truth[i].position,
                velocity: truth[i].velocity,
                active: ag.focal.is_some(),
                est_position,
                est_velocity,
                frame_center: ag.frame_center,
                true_frame_position: true_frame,
                command: ag.command,
                nees_position,
            }
        })
        .collect();
    let positions: Vec<Vec2> = truth.iter().map(|tr| tr.position).collect();
    LogRow {
        t,
        uavs,
        d_nb: metric_neighbor_distance(&positions, pairs).unwrap_or(f64::NAN),
        centroid: Vec2::ZERO,
        v_drift: Vec2::ZERO,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(mode: Mode, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            duration: 30.0,
            dropout_time: 5.0,
            mode,
            seed,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn zero_duration_gives_initial_row() {
        let cfg = ScenarioConfig {
            duration: 0.0,
            ..ScenarioConfig::default()
        };
        let log = run_scenario(&cfg).unwrap();
        assert_eq!(log.rows.len(), 1);
        assert_eq!(log.rows[0].t, 0.0);
    }

    #[test]
    fn rows_strictly_increasing() {
        let log = run_scenario(&short(Mode::Swa, 1)).unwrap();
        assert_eq!(log.rows.len(), 301);
        assert!(log.rows.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn hover_before_dropout() {
        let log = run_scenario(&short(Mode::Swa, 2)).unwrap();
        for row in log.rows.iter().filter(|r| r.t < 5.0) {
            assert!(!row.any_active());
            assert!((row.d_nb - log.rows[0].d_nb).abs() < 1e-9);
        }
        assert!(log.rows.last().unwrap().uavs.iter().all(|u| u.active));
    }

    #[test]
    fn deterministic() {
        let a = run_scenario(&short(Mode::Swa, 5)).unwrap().to_csv_string();
        let b = run_scenario(&short(Mode::Swa, 5)).unwrap().to_csv_string();
        assert_eq!(a, b);
        let c = run_scenario(&short(Mode::Swa, 6)).unwrap().to_csv_string();
        assert_ne!(a, c);
    }

    #[test]
    fn speed_bounded() {
        for mode in [Mode::Swa, Mode::StandaloneBaseline] {
            let log = run_scenario(&short(mode, 3)).unwrap();
            for row in &log.rows {
                for u in &row.uavs {
                    assert!(u.velocity.norm() <= 2.0 * 7.0);
                    assert!(u.position.is_finite());
                }
            }
        }
    }

    #[test]
    fn staggered_dropout() {
        let cfg = ScenarioConfig {
            dropout_stagger: 1.0,
            ..short(Mode::Swa, 0)
        };
        let log = run_scenario(&cfg).unwrap();
        let row = log.rows.iter().find(|r| (r.t - 6.5).abs() < 1e-9).unwrap();
        let active: Vec<bool> = row.uavs.iter().map(|u| u.active).collect();
        assert_eq!(active, vec![true, true, false]);
    }

    #[test]
    fn single_uav_runs() {
        let cfg = ScenarioConfig {
            n_uavs: 1,
            ..short(Mode::Swa, 0)
        };
        let log = run_scenario(&cfg).unwrap();
        assert!(log.rows.iter().all(|r| r.d_nb.is_nan()));
        assert!(log.rows.last().unwrap().uavs[0].position.is_finite());
    }
}
