//! Floating reference frame: the focal UAV's desired position, taken as the center of
//! a fixed-radius circle through its neighbors' estimated positions.
//!
//! * `n ≥ 3`: linear least squares `A_c·[a b c]ᵀ = B_c` with rows `[x_j, y_j, 1]` and
//!   `x_j² + y_j² − r²`, solved with the pseudoinverse; center `(a/2, b/2)`.
//! * `n = 2`: the two radius-`r` circles through both points; the center nearer the
//!   focal UAV wins.
//! * `n = 1`: the point at distance `r` from the neighbor on the line to the focal UAV.
//!
//! All positions are relative, expressed in the focal UAV's stable frame.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::Vec2;
use crate::linalg::{numerical_rank, pseudoinverse, singular_values};

/// Separation below which two points count as coincident.
const COINCIDENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("neighbor positions are collinear; circle center is undetermined")]
    Collinear,
    #[error("points coincide; circle center is undetermined")]
    Coincident,
    #[error("neighbors {separation:.3} m apart cannot lie on a circle of diameter {diameter:.3} m")]
    NoCircle { separation: f64, diameter: f64 },
    #[error("circle radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("solver needs at least {needed} neighbors, got {got}")]
    TooFewNeighbors { needed: usize, got: usize },
    #[error("non-finite neighbor position")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameParams {
    pub radius: f64,
}

impl Default for FrameParams {
    fn default() -> Self {
        Self { radius: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameEstimate {
    /// Origin of the floating frame in the focal stable frame (m).
    pub center: Vec2,
    pub n_used: usize,
    /// Smallest singular value of `A_c`.
    pub condition: f64,
}

/// Result of the per-step frame dispatch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameDecision {
    Fresh(FrameEstimate),
    /// No neighbors: keep using the previous frame.
    HoldLast,
}

fn check_radius(r: f64) -> Result<(), FrameError> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(FrameError::InvalidRadius(r))
    }
}

fn design_matrix(points: &[Vec2]) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), 3, |i, j| match j {
        0 => points[i].x,
        1 => points[i].y,
        _ => 1.0,
    })
}

fn condition_of(points: &[Vec2]) -> f64 {
    singular_values(&design_matrix(points))
        .last()
        .copied()
        .unwrap_or(0.0)
}

/// General least-squares center for three or more neighbors.
///
/// Coordinates are shifted to the neighbor centroid before the solve and the
/// solution gets one refinement pass; neither changes the least-squares optimum.
pub fn solve_center_general(neighbors: &[Vec2], r: f64) -> Result<FrameEstimate, FrameError> {
    check_radius(r)?;
    if neighbors.len() < 3 {
        return Err(FrameError::TooFewNeighbors {
            needed: 3,
            got: neighbors.len(),
        });
    }
    if neighbors.iter().any(|p| !p.is_finite()) {
        return Err(FrameError::NonFinite);
    }
    let n = neighbors.len() as f64;
    let shift = neighbors.iter().fold(Vec2::ZERO, |acc, &p| acc + p) * (1.0 / n);
    let local: Vec<Vec2> = neighbors.iter().map(|&p| p - shift).collect();

    let a = design_matrix(&local);
    if numerical_rank(&a) < 3 {
        return Err(FrameError::Collinear);
    }
    let b = DVector::from_iterator(local.len(), local.iter().map(|p| p.norm_squared() - r * r));
    let a_pinv = pseudoinverse(&a);
    let mut x = &a_pinv * &b;
    let residual = &b - &a * &x;
    x += &a_pinv * residual;

    let center = Vec2::new(0.5 * x[0], 0.5 * x[1]) + shift;
    if !center.is_finite() {
        return Err(FrameError::Collinear);
    }
    Ok(FrameEstimate {
        center,
        n_used: neighbors.len(),
        condition: condition_of(&local),
    })
}

/// Both circle centers through `n1` and `n2`, left of the chord `n1 → n2` first.
pub fn two_point_candidates(n1: Vec2, n2: Vec2, r: f64) -> Result<[Vec2; 2], FrameError> {
    check_radius(r)?;
    if !n1.is_finite() || !n2.is_finite() {
        return Err(FrameError::NonFinite);
    }
    let chord = n2 - n1;
    let d = chord.norm();
    if d <= COINCIDENT_TOL {
        return Err(FrameError::Coincident);
    }
    let diameter = 2.0 * r;
    if d > diameter * (1.0 + 1e-12) {
        return Err(FrameError::NoCircle {
            separation: d,
            diameter,
        });
    }
    let mid = (n1 + n2) * 0.5;
    let h = (r * r - 0.25 * d * d).max(0.0).sqrt();
    let left = chord.perp() * (1.0 / d);
    Ok([mid + left * h, mid - left * h])
}

/// Two-neighbor case: the candidate center closer to `fuav_hint`. Exact ties go to
/// the candidate left of the chord `n1 → n2`.
pub fn solve_center_two(
    n1: Vec2,
    n2: Vec2,
    fuav_hint: Vec2,
    r: f64,
) -> Result<FrameEstimate, FrameError> {
    let [left, right] = two_point_candidates(n1, n2, r)?;
    let center = if right.distance(fuav_hint) < left.distance(fuav_hint) {
        right
    } else {
        left
    };
    Ok(FrameEstimate {
        center,
        n_used: 2,
        condition: condition_of(&[n1, n2]),
    })
}

/// One-neighbor case: the point on the line neighbor–focal UAV at distance `r` from
/// the neighbor, on the focal UAV's side.
pub fn solve_center_one(n1: Vec2, fuav_hint: Vec2, r: f64) -> Result<FrameEstimate, FrameError> {
    check_radius(r)?;
    if !n1.is_finite() || !fuav_hint.is_finite() {
        return Err(FrameError::NonFinite);
    }
    let offset = n1 - fuav_hint;
    let d = offset.norm();
    if d <= COINCIDENT_TOL {
        return Err(FrameError::Coincident);
    }
    // Of n1 ± r·u, the minus sign is always the nearer one for r > 0.
    let u = offset * (1.0 / d);
    Ok(FrameEstimate {
        center: n1 - u * r,
        n_used: 1,
        condition: condition_of(&[n1]),
    })
}

/// Dispatches on the neighbor count.
pub fn estimate_frame(
    neighbor_positions: &[Vec2],
    fuav_hint: Vec2,
    params: &FrameParams,
) -> Result<FrameDecision, FrameError> {
    let r = params.radius;
    let est = match neighbor_positions {
        [] => return Ok(FrameDecision::HoldLast),
        [a] => solve_center_one(*a, fuav_hint, r)?,
        [a, b] => solve_center_two(*a, *b, fuav_hint, r)?,
        many => solve_center_general(many, r)?,
    };
    Ok(FrameDecision::Fresh(est))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    /// Brute-force minimizer of the algebraic residual `Σ(a x + b y + c − (x²+y²−r²))²`
    /// over the center, with `c` profiled out in closed form. Shrinking grid search.
    fn brute_force_center(points: &[Vec2], r: f64) -> Vec2 {
        let cost = |c: Vec2| {
            let dev: Vec<f64> = points
                .iter()
                .map(|p| p.norm_squared() - r * r - 2.0 * c.x * p.x - 2.0 * c.y * p.y)
                .collect();
            let mean = dev.iter().sum::<f64>() / dev.len() as f64;
            dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>()
        };
        let mut best = points.iter().fold(Vec2::ZERO, |a, &p| a + p) * (1.0 / points.len() as f64);
        let mut span = 200.0;
        while span > 1e-11 {
            let step = span / 20.0;
            let mut cand = (cost(best), best);
            for i in -20..=20 {
                for j in -20..=20 {
                    let c = best + v(i as f64 * step, j as f64 * step);
                    let f = cost(c);
                    if f < cand.0 {
                        cand = (f, c);
                    }
                }
            }
            best = cand.1;
            span = step * 2.0;
        }
        best
    }

    #[test]
    fn symmetric_points_on_circle() {
        let e = solve_center_general(&[v(10.0, 0.0), v(0.0, 10.0), v(-10.0, 0.0)], 10.0).unwrap();
        assert!(e.center.norm() < 1e-12);
        assert_eq!(e.n_used, 3);
        assert!(e.condition > 0.0);
    }

    #[test]
    fn off_radius_points_match_brute_force() {
        let pts = [v(11.0, 0.0), v(0.0, 11.0), v(-11.0, 0.0)];
        let e = solve_center_general(&pts, 10.0).unwrap();
        let oracle = brute_force_center(&pts, 10.0);
        assert!((e.center - oracle).norm() < 1e-6, "{:?} vs {:?}", e.center, oracle);
        // r only shifts the constant column, so the center is the circle through the points.
        assert!(e.center.norm() < 1e-9);
    }

    #[test]
    fn overdetermined_noisy_matches_brute_force() {
        let pts = [v(10.1, 0.2), v(0.3, 9.8), v(-9.9, -0.1), v(0.1, -10.2), v(7.0, 7.3)];
        let e = solve_center_general(&pts, 10.0).unwrap();
        let oracle = brute_force_center(&pts, 10.0);
        assert!((e.center - oracle).norm() < 1e-6);
    }

    #[test]
    fn collinear_is_degenerate() {
        let err = solve_center_general(&[v(1.0, 0.0), v(2.0, 0.0), v(3.0, 0.0)], 10.0).unwrap_err();
        assert_eq!(err, FrameError::Collinear);
        let err = solve_center_general(&[v(1.0, 1.0), v(1.0, 1.0), v(1.0, 1.0)], 10.0).unwrap_err();
        assert_eq!(err, FrameError::Collinear);
    }

    #[test]
    fn two_neighbor_examples() {
        let e = solve_center_two(v(5.0, 5.0), v(5.0, -5.0), Vec2::ZERO, 10.0).unwrap();
        assert!((e.center - v(5.0 - 75f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!((e.center.x + 3.660_254).abs() < 1e-6);

        for hint in [v(0.0, 30.0), v(-4.0, -9.0), v(100.0, 0.0)] {
            let e = solve_center_two(v(-10.0, 0.0), v(10.0, 0.0), hint, 10.0).unwrap();
            assert!(e.center.norm() < 1e-12);
        }

        let err = solve_center_two(Vec2::ZERO, v(30.0, 0.0), Vec2::ZERO, 10.0).unwrap_err();
        assert!(matches!(err, FrameError::NoCircle { .. }));
        let err = solve_center_two(v(1.0, 1.0), v(1.0, 1.0), Vec2::ZERO, 10.0).unwrap_err();
        assert_eq!(err, FrameError::Coincident);
    }

    #[test]
    fn two_neighbor_exact_tie_goes_left() {
        // Hint on the chord midpoint is equidistant from both candidates.
        let e = solve_center_two(v(-5.0, 0.0), v(5.0, 0.0), Vec2::ZERO, 10.0).unwrap();
        let [left, _] = two_point_candidates(v(-5.0, 0.0), v(5.0, 0.0), 10.0).unwrap();
        assert_eq!(e.center, left);
        assert!(e.center.y > 0.0);
    }

    #[test]
    fn one_neighbor_examples() {
        let e = solve_center_one(v(6.0, 8.0), Vec2::ZERO, 10.0).unwrap();
        assert!(e.center.norm() < 1e-12);
        let e = solve_center_one(v(20.0, 0.0), Vec2::ZERO, 10.0).unwrap();
        assert!((e.center - v(10.0, 0.0)).norm() < 1e-12);
        let e = solve_center_one(v(10.0, 0.0), Vec2::ZERO, 10.0).unwrap();
        assert!(e.center.norm() < 1e-12);
        assert_eq!(
            solve_center_one(v(1.0, 2.0), v(1.0, 2.0), 10.0).unwrap_err(),
            FrameError::Coincident
        );
    }

    #[test]
    fn dispatch_by_count() {
        let p = FrameParams::default();
        let three = [v(10.0, 0.0), v(0.0, 10.0), v(-10.0, 0.0)];
        assert_eq!(
            estimate_frame(&three, Vec2::ZERO, &p).unwrap(),
            FrameDecision::Fresh(solve_center_general(&three, 10.0).unwrap())
        );
        assert_eq!(
            estimate_frame(&[v(20.0, 0.0)], Vec2::ZERO, &p).unwrap(),
            FrameDecision::Fresh(solve_center_one(v(20.0, 0.0), Vec2::ZERO, 10.0).unwrap())
        );
        assert_eq!(estimate_frame(&[], Vec2::ZERO, &p).unwrap(), FrameDecision::HoldLast);
        assert!(estimate_frame(&[v(0.0, 0.0), v(30.0, 0.0)], v(1.0, 1.0), &p).is_err());
    }

    #[test]
    fn invalid_radius_rejected() {
        assert_eq!(
            solve_center_one(v(1.0, 0.0), Vec2::ZERO, 0.0).unwrap_err(),
            FrameError::InvalidRadius(0.0)
        );
        assert!(solve_center_two(v(1.0, 0.0), v(2.0, 0.0), Vec2::ZERO, -1.0).is_err());
    }

    fn circle_points() -> impl Strategy<Value = (Vec2, f64, Vec<f64>)> {
        (
            proptest::array::uniform2(-50.0f64..50.0),
            1.0f64..30.0,
            proptest::collection::vec(0.0f64..std::f64::consts::TAU, 3..9),
        )
            .prop_filter("spread angles", |(_, _, angles)| {
                let mut a = angles.clone();
                a.sort_by(f64::total_cmp);
                a.windows(2).filter(|w| w[1] - w[0] > 0.3).count() >= 2
            })
            .prop_map(|(c, r, a)| (v(c[0], c[1]), r, a))
    }

    proptest! {
        #[test]
        fn exact_circle_recovered((c, r, angles) in circle_points()) {
            let pts: Vec<Vec2> = angles.iter().map(|a| c + v(a.cos(), a.sin()) * r).collect();
            let e = solve_center_general(&pts, r).unwrap();
            prop_assert!((e.center - c).norm() < 1e-9);
        }

        #[test]
        fn general_translation_and_rotation_equivariance(
            (c, r, angles) in circle_points(),
            t in proptest::array::uniform2(-100.0f64..100.0),
            rot in -3.0f64..3.0,
        ) {
            let pts: Vec<Vec2> = angles.iter().map(|a| c + v(a.cos() * 1.05, a.sin() * 0.97) * r).collect();
            let base = solve_center_general(&pts, 10.0).unwrap().center;
            let t = v(t[0], t[1]);
            let shifted: Vec<Vec2> = pts.iter().map(|&p| p + t).collect();
            let moved = solve_center_general(&shifted, 10.0).unwrap().center;
            prop_assert!((moved - (base + t)).norm() < 1e-9);

            let rm = crate::geometry::Rot2::from_angle(rot);
            let rotated: Vec<Vec2> = pts.iter().map(|&p| rm.rotate(p)).collect();
            let turned = solve_center_general(&rotated, 10.0).unwrap().center;
            prop_assert!((turned - rm.rotate(base)).norm() < 1e-9);
        }

        #[test]
        fn two_and_one_translation_equivariance(
            a in proptest::array::uniform2(-8.0f64..8.0),
            b in proptest::array::uniform2(-8.0f64..8.0),
            h in proptest::array::uniform2(-30.0f64..30.0),
            t in proptest::array::uniform2(-100.0f64..100.0),
        ) {
            let (a, b, h, t) = (v(a[0], a[1]), v(b[0], b[1]), v(h[0], h[1]), v(t[0], t[1]));
            prop_assume!(a.distance(b) > 1e-3);
            let base = solve_center_two(a, b, h, 10.0).unwrap().center;
            let moved = solve_center_two(a + t, b + t, h + t, 10.0).unwrap().center;
            prop_assert!((moved - (base + t)).norm() < 1e-9);

            prop_assume!(a.distance(h) > 1e-3);
            let base = solve_center_one(a, h, 10.0).unwrap().center;
            let moved = solve_center_one(a + t, h + t, 10.0).unwrap().center;
            prop_assert!((moved - (base + t)).norm() < 1e-9);
        }

        #[test]
        fn two_point_candidates_lie_at_radius(
            a in proptest::array::uniform2(-8.0f64..8.0),
            b in proptest::array::uniform2(-8.0f64..8.0),
            r in 6.0f64..40.0,
        ) {
            let (a, b) = (v(a[0], a[1]), v(b[0], b[1]));
            prop_assume!(a.distance(b) > 1e-3 && a.distance(b) < 2.0 * r);
            for c in two_point_candidates(a, b, r).unwrap() {
                prop_assert!((c.distance(a) - r).abs() < 1e-9);
                prop_assert!((c.distance(b) - r).abs() < 1e-9);
            }
        }
    }
}
