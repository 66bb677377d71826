//! Swarm comparison metrics: mean neighbor distance and drift velocity.

use crate::control::{select_nearest, ControlParams};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Mean Euclidean distance over the given neighbor pairs.
pub fn metric_neighbor_distance(positions: &[Vec2], pairs: &[(usize, usize)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    let mut sum = 0.0;
    for &(a, b) in pairs {
        let (pa, pb) = positions
            .get(a)
            .zip(positions.get(b))
            .ok_or_else(|| Error::InvalidArgument(format!("pair ({a}, {b}) out of range")))?;
        sum += pa.distance(*pb);
    }
    Ok(sum / pairs.len() as f64)
}

/// Unordered neighbor pairs: `{i, j}` whenever `j` is in `i`'s neighborhood (as
/// chosen by the control-layer selection on true relative positions) or vice versa.
/// Sorted, each pair once with `i < j`.
pub fn neighbor_pairs(positions: &[Vec2], params: &ControlParams) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (i, &pi) in positions.iter().enumerate() {
        let rel: Vec<(usize, Vec2)> = positions
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, &pj)| (j, pj - pi))
            .collect();
        for k in select_nearest(&rel, params) {
            let j = rel[k].0;
            pairs.push((i.min(j), i.max(j)));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// All unordered pairs of `n` agents.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

pub fn centroid(positions: &[Vec2]) -> Vec2 {
    if positions.is_empty() {
        return Vec2::ZERO;
    }
    positions.iter().fold(Vec2::ZERO, |acc, &p| acc + p) * (1.0 / positions.len() as f64)
}

/// Time derivative of the centroid trajectory sampled every `dt`: central
/// differences inside, one-sided at both ends.
pub fn metric_drift_velocity(centroids: &[Vec2], dt: f64) -> Result<Vec<Vec2>> {
    let n = centroids.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    Ok((0..n)
        .map(|k| match k {
            0 => (centroids[1] - centroids[0]) * (1.0 / dt),
            k if k == n - 1 => (centroids[k] - centroids[k - 1]) * (1.0 / dt),
            k => (centroids[k + 1] - centroids[k - 1]) * (0.5 / dt),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_distance_examples() {
        let h = 10.0 * 3f64.sqrt() / 2.0;
        let tri = [Vec2::ZERO, Vec2::new(10.0, 0.0), Vec2::new(5.0, h)];
        assert!((metric_neighbor_distance(&tri, &all_pairs(3)).unwrap() - 10.0).abs() < 1e-12);

        let two = [Vec2::ZERO, Vec2::new(0.0, 7.0)];
        assert_eq!(metric_neighbor_distance(&two, &[(0, 1)]).unwrap(), 7.0);

        let sq = [Vec2::ZERO, Vec2::new(10.0, 0.0), Vec2::new(10.0, 10.0), Vec2::new(0.0, 10.0)];
        let pairs = neighbor_pairs(&sq, &ControlParams::default());
        assert_eq!(pairs, vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert!((metric_neighbor_distance(&sq, &pairs).unwrap() - 10.0).abs() < 1e-12);

        assert_eq!(metric_neighbor_distance(&sq, &[]).unwrap_err(), Error::EmptyPairs);
    }

    #[test]
    fn drift_velocity_examples() {
        let moving: Vec<Vec2> = (0..20).map(|k| Vec2::new(k as f64 * 0.1, 0.0)).collect();
        for v in metric_drift_velocity(&moving, 0.1).unwrap() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        let still = vec![Vec2::new(3.0, 4.0); 5];
        assert!(metric_drift_velocity(&still, 0.1).unwrap().iter().all(|v| v.norm() == 0.0));

        let quad: Vec<Vec2> = (0..21).map(|k| {
            let t = k as f64 * 0.1;
            Vec2::new(t * t, 0.0)
        }).collect();
        let v = metric_drift_velocity(&quad, 0.1).unwrap();
        assert!((v[10].x - 2.0).abs() < 1e-9);

        assert!(metric_drift_velocity(&still[..1], 0.1).is_err());
    }
}
