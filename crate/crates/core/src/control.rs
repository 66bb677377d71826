//! Neighborhood selection and the lateral velocity feedback law.

use crate::focal_estimator::FocalBelief;
use crate::geometry::Vec2;
use crate::surroundings::NeighborTrack;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    /// Position gain (1/s).
    pub k_p: f64,
    /// Velocity gain.
    pub k_v: f64,
    /// Command saturation (m/s).
    pub v_max: f64,
    /// Neighbors farther than this are ignored (m).
    pub neighbor_range: f64,
    pub neighbor_cap: usize,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            k_p: 0.5,
            k_v: 0.63,
            v_max: 7.0,
            neighbor_range: 50.0,
            neighbor_cap: 2,
        }
    }
}

/// Indices of the positions within range of the origin, nearest first, ties by
/// ascending `key`, truncated to the cap.
pub fn select_nearest<K: Ord + Copy>(
    candidates: &[(K, Vec2)],
    params: &ControlParams,
) -> Vec<usize> {
    let mut ranked: Vec<(f64, K, usize)> = candidates
        .iter()
        .enumerate()
        .filter_map(|(i, &(key, p))| {
            let d = p.norm();
            (d <= params.neighbor_range).then_some((d, key, i))
        })
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked.truncate(params.neighbor_cap);
    ranked.into_iter().map(|(_, _, i)| i).collect()
}

/// Tracks within `neighbor_range` of the focal UAV, nearest first (ties by id),
/// at most `neighbor_cap` of them.
pub fn select_neighborhood<'a, I>(tracks: I, params: &ControlParams) -> Vec<&'a NeighborTrack>
where
    I: IntoIterator<Item = &'a NeighborTrack>,
{
    let tracks: Vec<&NeighborTrack> = tracks.into_iter().collect();
    let keyed: Vec<_> = tracks.iter().map(|t| (t.id, t.position())).collect();
    select_nearest(&keyed, params)
        .into_iter()
        .map(|i| tracks[i])
        .collect()
}

/// Scales `v` down to norm `v_max` if it exceeds it.
pub fn saturate(v: Vec2, v_max: f64) -> Vec2 {
    let n = v.norm();
    if n > v_max {
        v * (v_max / n)
    } else {
        v
    }
}

/// Unsaturated feedback `−k_p·p̂ − k_v·v̂`. The sign drives the UAV toward the
/// floating-frame origin.
pub fn feedback(position: Vec2, velocity: Vec2, params: &ControlParams) -> Vec2 {
    -(position * params.k_p) - velocity * params.k_v
}

/// Desired lateral velocity from the focal estimate, saturated to `v_max`.
pub fn compute_velocity_command(state: &FocalBelief, params: &ControlParams) -> Vec2 {
    saturate(feedback(state.position(), state.velocity(), params), params.v_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::{Belief, Matrix6, Vector6};
    use crate::focal_estimator::FocalParams;
    use crate::surroundings::AgentId;
    use proptest::prelude::*;

    fn state(p: Vec2, v: Vec2) -> FocalBelief {
        let mut s = FocalBelief::initial(&FocalParams::default(), 0.0);
        s.belief.mean[0] = p.x;
        s.belief.mean[1] = p.y;
        s.belief.mean[2] = v.x;
        s.belief.mean[3] = v.y;
        s
    }

    fn track(id: usize, x: f64, y: f64) -> NeighborTrack {
        let mut mean = Vector6::zeros();
        mean[0] = x;
        mean[1] = y;
        NeighborTrack {
            id: AgentId(id),
            belief: Belief::new(mean, Matrix6::identity()),
            last_seen: 0.0,
            created_at: 0.0,
        }
    }

    #[test]
    fn command_examples() {
        let p = ControlParams::default();
        let c = compute_velocity_command(&state(Vec2::new(2.0, 0.0), Vec2::ZERO), &p);
        assert_eq!(c, Vec2::new(-1.0, 0.0));
        assert_eq!(compute_velocity_command(&state(Vec2::ZERO, Vec2::ZERO), &p), Vec2::ZERO);
        let c = compute_velocity_command(&state(Vec2::new(100.0, 0.0), Vec2::ZERO), &p);
        assert!((c - Vec2::new(-7.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn selection_examples() {
        let p = ControlParams { neighbor_range: 20.0, neighbor_cap: 5, ..Default::default() };
        let tracks = [track(0, 50.0, 0.0), track(1, 0.0, 8.0), track(2, 5.0, 0.0)];
        let sel: Vec<usize> = select_neighborhood(&tracks, &p).iter().map(|t| t.id.0).collect();
        assert_eq!(sel, vec![2, 1]);

        let many: Vec<_> = (0..7).map(|i| track(i, 10.0 - i as f64, 0.0)).collect();
        let sel: Vec<usize> = select_neighborhood(&many, &p).iter().map(|t| t.id.0).collect();
        assert_eq!(sel, vec![6, 5, 4, 3, 2]);

        assert!(select_neighborhood(&[], &p).is_empty());
    }

    #[test]
    fn selection_ties_by_ascending_id() {
        let p = ControlParams { neighbor_cap: 2, ..Default::default() };
        let tracks = [track(7, 0.0, 10.0), track(3, 10.0, 0.0), track(5, -10.0, 0.0)];
        let sel: Vec<usize> = select_neighborhood(&tracks, &p).iter().map(|t| t.id.0).collect();
        assert_eq!(sel, vec![3, 5]);
    }

    proptest! {
        #[test]
        fn unsaturated_command_scales_linearly(
            px in -5.0f64..5.0, py in -5.0f64..5.0, vx in -3.0f64..3.0, vy in -3.0f64..3.0,
        ) {
            let p = ControlParams { v_max: 1e6, ..Default::default() };
            let a = compute_velocity_command(&state(Vec2::new(px, py), Vec2::new(vx, vy)), &p);
            let b = compute_velocity_command(&state(Vec2::new(2.0 * px, 2.0 * py), Vec2::new(2.0 * vx, 2.0 * vy)), &p);
            prop_assert_eq!(b, a * 2.0);
        }

        #[test]
        fn saturation_preserves_direction(x in -100.0f64..100.0, y in -100.0f64..100.0, vmax in 0.1f64..10.0) {
            let v = Vec2::new(x, y);
            prop_assume!(v.norm() > 1e-6);
            let s = saturate(v, vmax);
            prop_assert!(s.norm() <= vmax * (1.0 + 1e-12));
            let cos = s.dot(v) / (s.norm() * v.norm());
            prop_assert!((cos - 1.0).abs() < 1e-12);
        }
    }
}
