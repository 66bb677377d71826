//! Model of the surroundings: one linear Kalman filter per observed UAV.
//!
//! Each track estimates the relative position, velocity and acceleration of one
//! neighbor in the focal UAV's stable frame under a constant-acceleration model.
//! Tracks are created on first detection and dropped once they go stale.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Matrix2x6, Vector2};

use crate::belief::{check_dt, diag3_blocks, kinematic_transition, Belief, Matrix6, Vector6};
use crate::error::{Error, Result};
use crate::geometry::{rotate_body_to_stable, Rot2, Vec2};

/// Identifier assigned to a UAV by the mutual perception system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 99% quantile of the chi-square distribution with 2 degrees of freedom.
pub const GATE_99_2DOF: f64 = 9.210_340_371_976_18;

#[derive(Debug, Clone, PartialEq)]
pub struct SurroundingsParams {
    pub process_noise: Matrix6,
    pub measurement_noise: Matrix2<f64>,
    pub stale_timeout: f64,
    pub initial_velocity_var: f64,
    pub initial_acceleration_var: f64,
    /// Mahalanobis gate on the innovation; `None` disables gating.
    pub outlier_gate: Option<f64>,
}

impl Default for SurroundingsParams {
    fn default() -> Self {
        Self {
            process_noise: diag3_blocks(1e-3, 1e-2, 1e-1),
            measurement_noise: Matrix2::identity() * 0.1,
            stale_timeout: 2.0,
            initial_velocity_var: 1.0,
            initial_acceleration_var: 1.0,
            outlier_gate: None,
        }
    }
}

fn position_observation() -> Matrix2x6<f64> {
    let mut h = Matrix2x6::zeros();
    h[(0, 0)] = 1.0;
    h[(1, 1)] = 1.0;
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTrack {
    pub id: AgentId,
    pub belief: Belief<6>,
    pub last_seen: f64,
    pub created_at: f64,
}

impl NeighborTrack {
    /// New track at measured position `z`, at rest, with `cov = diag(R_o, V₀, A₀)`.
    pub fn initialize(id: AgentId, z: Vec2, t: f64, params: &SurroundingsParams) -> Self {
        let mut mean = Vector6::zeros();
        mean[0] = z.x;
        mean[1] = z.y;
        let mut cov = Matrix6::zeros();
        cov.fixed_view_mut::<2, 2>(0, 0)
            .copy_from(&params.measurement_noise);
        for k in 2..4 {
            cov[(k, k)] = params.initial_velocity_var;
        }
        for k in 4..6 {
            cov[(k, k)] = params.initial_acceleration_var;
        }
        Self {
            id,
            belief: Belief::new(mean, cov),
            last_seen: t,
            created_at: t,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.belief.mean[0], self.belief.mean[1])
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.belief.mean[2], self.belief.mean[3])
    }

    /// Constant-acceleration prediction over `dt`.
    pub fn predicted(&self, dt: f64, params: &SurroundingsParams) -> Result<Self> {
        check_dt(dt)?;
        let f = kinematic_transition(dt, 1.0);
        Ok(Self {
            belief: self.belief.predict(&f, None, &params.process_noise),
            ..self.clone()
        })
    }

    /// Position correction with `H_o = [I₂ 0₂ₓ₄]`.
    pub fn corrected(&self, z: Vec2, params: &SurroundingsParams) -> Result<Self> {
        z.ensure_finite("detection")?;
        let belief = self.belief.correct(
            &position_observation(),
            &z.to_vector(),
            &params.measurement_noise,
        )?;
        Ok(Self {
            belief,
            ..self.clone()
        })
    }

    /// Squared Mahalanobis distance of `z` from the predicted position.
    pub fn innovation_distance(&self, z: Vec2, params: &SurroundingsParams) -> Result<f64> {
        let (pos, cov) = self.belief.block(0);
        let s = cov + params.measurement_noise;
        let s_inv = s.try_inverse().ok_or(Error::SingularInnovation)?;
        let nu: Vector2<f64> = (z - pos).to_vector();
        Ok((nu.transpose() * s_inv * nu)[(0, 0)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestOutcome {
    Created,
    Updated,
    /// Detection older than the track; dropped.
    OutOfOrder,
    /// Innovation failed the outlier gate; dropped.
    Gated,
}

/// The bank of neighbor filters owned by one focal UAV.
#[derive(Debug, Clone, Default)]
pub struct TrackBank {
    tracks: BTreeMap<AgentId, NeighborTrack>,
    out_of_order: usize,
    gated: usize,
}

impl TrackBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn get(&self, id: AgentId) -> Option<&NeighborTrack> {
        self.tracks.get(&id)
    }

    /// Tracks in ascending id order.
    pub fn tracks(&self) -> impl Iterator<Item = &NeighborTrack> {
        self.tracks.values()
    }

    pub fn out_of_order_count(&self) -> usize {
        self.out_of_order
    }

    pub fn gated_count(&self) -> usize {
        self.gated
    }

    /// Feeds one body-frame detection taken at heading `heading` and time `t`.
    ///
    /// Non-finite detections are rejected and leave the bank untouched.
    pub fn ingest(
        &mut self,
        id: AgentId,
        z_body: Vec2,
        heading: f64,
        t: f64,
        params: &SurroundingsParams,
    ) -> Result<IngestOutcome> {
        z_body.ensure_finite("detection")?;
        if !heading.is_finite() || !t.is_finite() {
            return Err(Error::NonFinite("detection stamp"));
        }
        let z = rotate_body_to_stable(z_body, Rot2::from_angle(heading));

        let Some(track) = self.tracks.get(&id) else {
            self.tracks
                .insert(id, NeighborTrack::initialize(id, z, t, params));
            return Ok(IngestOutcome::Created);
        };
        if t < track.last_seen {
            self.out_of_order += 1;
            return Ok(IngestOutcome::OutOfOrder);
        }
        let dt = t - track.last_seen;
        let prior = if dt > 0.0 {
            track.predicted(dt, params)?
        } else {
            track.clone()
        };
        if let Some(gate) = params.outlier_gate {
            if prior.innovation_distance(z, params)? > gate {
                self.gated += 1;
                return Ok(IngestOutcome::Gated);
            }
        }
        let mut posterior = prior.corrected(z, params)?;
        posterior.last_seen = t;
        self.tracks.insert(id, posterior);
        Ok(IngestOutcome::Updated)
    }

    /// Removes every track with `t − last_seen > stale_timeout`.
    pub fn prune_stale(&mut self, t: f64, params: &SurroundingsParams) -> usize {
        let before = self.tracks.len();
        self.tracks
            .retain(|_, tr| t - tr.last_seen <= params.stale_timeout);
        before - self.tracks.len()
    }
}
