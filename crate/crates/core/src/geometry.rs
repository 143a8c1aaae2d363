//! Three-circle vehicle footprint and pairwise clearance measures.
//!
//! A vehicle body is covered by three circles of radius `half_width` whose
//! centers sit on the heading axis at offsets `p * (half_length -
//! half_width)` for `p in {-1, 0, 1}`. Between two vehicles the controller
//! uses the smooth squared-clearance measure
//!
//! ```text
//! g = min over the 9 circle pairs of  |c_a - c_b|^2 - (w_a + w_b)^2
//! ```
//!
//! which is negative on overlap, zero when the closest circle pair touches,
//! and positive otherwise. It is not a metric distance; only its sign and
//! threshold matter for the safety constraint. Reporting code uses
//! [`euclidean_min_gap`] instead, which is a plain gap in meters.

use thiserror::Error;

use crate::dynamics::{BodyGeometry, VehicleState};
use crate::Point;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GeometryError {
    #[error("body dimensions must be positive")]
    NonPositiveDimension,
    #[error("half_length ({half_length}) must exceed half_width ({half_width})")]
    DegenerateFootprint { half_length: f64, half_width: f64 },
}

/// The three footprint circles of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSet {
    /// Circle centers for p = -1, 0, 1, in that order.
    pub centers: [Point; 3],
    /// Common radius (the body half width).
    pub radius: f64,
}

/// Footprint circles for a vehicle at `state`.
///
/// Rejects geometries with `half_length <= half_width`.
pub fn circle_centers(state: &VehicleState, geom: &BodyGeometry) -> Result<CircleSet, GeometryError> {
    if geom.half_length <= geom.half_width {
        return Err(GeometryError::DegenerateFootprint {
            half_length: geom.half_length,
            half_width: geom.half_width,
        });
    }
    Ok(circles_unchecked(state, geom))
}

#[inline]
fn circles_unchecked(state: &VehicleState, geom: &BodyGeometry) -> CircleSet {
    let spread = geom.half_length - geom.half_width;
    let (sin, cos) = state.heading.sin_cos();
    let (dx, dy) = (spread * cos, spread * sin);
    CircleSet {
        centers: [
            [state.x - dx, state.y - dy],
            [state.x, state.y],
            [state.x + dx, state.y + dy],
        ],
        radius: geom.half_width,
    }
}

/// Smooth squared-clearance measure between two vehicles: the minimum over
/// all 9 circle pairs of `center_distance^2 - (radius_a + radius_b)^2`.
///
/// Symmetric in its arguments. Negative iff some circle pair overlaps.
#[inline]
pub fn pair_distance(
    a: &VehicleState,
    a_geom: &BodyGeometry,
    b: &VehicleState,
    b_geom: &BodyGeometry,
) -> f64 {
    let ca = circles_unchecked(a, a_geom);
    let cb = circles_unchecked(b, b_geom);
    let touch_sq = (ca.radius + cb.radius) * (ca.radius + cb.radius);
    let mut min = f64::INFINITY;
    for pa in &ca.centers {
        for pb in &cb.centers {
            let dx = pa[0] - pb[0];
            let dy = pa[1] - pb[1];
            let d = dx * dx + dy * dy - touch_sq;
            if d < min {
                min = d;
            }
        }
    }
    min
}

/// Result of checking one vehicle against a set of others.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyCheck {
    /// True iff every margin is at least the threshold.
    pub safe: bool,
    /// Per-vehicle squared-clearance margins, in input order.
    pub margins: Vec<f64>,
}

/// Evaluate the safety constraint `pair_distance >= epsilon` (boundary
/// inclusive) against every other vehicle. Vacuously safe with no others.
pub fn is_safe(
    ego: &VehicleState,
    ego_geom: &BodyGeometry,
    others: &[(VehicleState, BodyGeometry)],
    epsilon: f64,
) -> SafetyCheck {
    debug_assert!(epsilon >= 0.0);
    let margins: Vec<f64> = others
        .iter()
        .map(|(state, geom)| pair_distance(ego, ego_geom, state, geom))
        .collect();
    SafetyCheck { safe: margins.iter().all(|&m| m >= epsilon), margins }
}

/// Plain minimum gap in meters between two vehicle footprints: the smallest
/// circle-pair center distance minus the radii, clamped at zero on overlap.
/// Used for reporting only, never for control.
pub fn euclidean_min_gap(
    a: &VehicleState,
    a_geom: &BodyGeometry,
    b: &VehicleState,
    b_geom: &BodyGeometry,
) -> f64 {
    let ca = circles_unchecked(a, a_geom);
    let cb = circles_unchecked(b, b_geom);
    let touch = ca.radius + cb.radius;
    let mut min = f64::INFINITY;
    for pa in &ca.centers {
        for pb in &cb.centers {
            let gap = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt() - touch;
            if gap < min {
                min = gap;
            }
        }
    }
    min.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom() -> BodyGeometry {
        BodyGeometry::default()
    }

    fn state(x: f64, y: f64, heading: f64) -> VehicleState {
        VehicleState::new(x, y, heading, 0.0)
    }

    /// Independent evaluation of the squared-clearance measure straight from
    /// its defining formula, without going through CircleSet.
    fn brute_force_pair(a: &VehicleState, ag: &BodyGeometry, b: &VehicleState, bg: &BodyGeometry) -> f64 {
        let mut min = f64::INFINITY;
        for p in [-1.0, 0.0, 1.0] {
            for q in [-1.0, 0.0, 1.0] {
                let ax = a.x + p * (ag.half_length - ag.half_width) * a.heading.cos();
                let ay = a.y + p * (ag.half_length - ag.half_width) * a.heading.sin();
                let bx = b.x + q * (bg.half_length - bg.half_width) * b.heading.cos();
                let by = b.y + q * (bg.half_length - bg.half_width) * b.heading.sin();
                let d = (ax - bx).powi(2) + (ay - by).powi(2)
                    - (ag.half_width + bg.half_width).powi(2);
                min = min.min(d);
            }
        }
        min
    }

    #[test]
    fn centers_along_heading() {
        let c = circle_centers(&state(0.0, 0.0, 0.0), &geom()).unwrap();
        assert_eq!(c.centers[0], [-1.1, 0.0]);
        assert_eq!(c.centers[1], [0.0, 0.0]);
        assert_eq!(c.centers[2], [1.1, 0.0]);
        assert_eq!(c.radius, 0.9);
    }

    #[test]
    fn middle_circle_is_body_center() {
        let c = circle_centers(&state(4.2, -7.3, 1.1), &geom()).unwrap();
        assert_eq!(c.centers[1], [4.2, -7.3]);
    }

    #[test]
    fn centers_rotate_with_heading() {
        let c = circle_centers(&state(0.0, 0.0, std::f64::consts::FRAC_PI_2), &geom()).unwrap();
        assert!(c.centers[2][0].abs() < 1e-12);
        assert!((c.centers[2][1] - 1.1).abs() < 1e-12);
        assert!((c.centers[0][1] + 1.1).abs() < 1e-12);
    }

    #[test]
    fn centers_reject_degenerate_geometry() {
        let bad = BodyGeometry { half_length: 0.9, ..geom() };
        assert!(circle_centers(&state(0.0, 0.0, 0.0), &bad).is_err());
    }

    #[test]
    fn coincident_vehicles() {
        // Fully overlapping: -(2w)^2 = -3.24 with w = 0.9.
        let d = pair_distance(&state(0.0, 0.0, 0.0), &geom(), &state(0.0, 0.0, 0.0), &geom());
        assert!((d + 3.24).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn touching_circles_give_zero() {
        // Lateral offset of exactly 2w: the aligned circle pairs touch.
        let a = state(0.0, 0.0, 0.0);
        let b = state(0.0, 1.8, 0.0);
        let d = pair_distance(&a, &geom(), &b, &geom());
        assert!(d.abs() < 1e-12, "d = {d}");
        assert!((d - brute_force_pair(&a, &geom(), &b, &geom())).abs() < 1e-12);
    }

    #[test]
    fn far_apart_matches_brute_force() {
        let a = state(0.0, 0.0, 0.0);
        let b = state(100.0, 0.0, 0.0);
        let d = pair_distance(&a, &geom(), &b, &geom());
        assert_eq!(d, brute_force_pair(&a, &geom(), &b, &geom()));
        // Closest circle pair is 97.8 m apart: 97.8^2 - 1.8^2.
        assert!((d - (97.8 * 97.8 - 3.24)).abs() < 1e-9);
    }

    #[test]
    fn brute_force_equivalence_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5000 {
            let a = state(
                rng.random_range(-20.0..20.0),
                rng.random_range(-8.0..8.0),
                rng.random_range(-3.1..3.1),
            );
            let b = state(
                rng.random_range(-20.0..20.0),
                rng.random_range(-8.0..8.0),
                rng.random_range(-3.1..3.1),
            );
            let d = pair_distance(&a, &geom(), &b, &geom());
            let bf = brute_force_pair(&a, &geom(), &b, &geom());
            assert!((d - bf).abs() < 1e-12);
            // Symmetry.
            let rev = pair_distance(&b, &geom(), &a, &geom());
            assert!((d - rev).abs() < 1e-12);
        }
    }

    #[test]
    fn rigid_motion_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let a = state(
                rng.random_range(-10.0..10.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-3.1..3.1),
            );
            let b = state(
                rng.random_range(-10.0..10.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-3.1..3.1),
            );
            let before = pair_distance(&a, &geom(), &b, &geom());

            let phi: f64 = rng.random_range(-3.1..3.1);
            let (tx, ty) = (rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
            let xf = |s: &VehicleState| {
                let (sin, cos) = phi.sin_cos();
                VehicleState::new(
                    cos * s.x - sin * s.y + tx,
                    sin * s.x + cos * s.y + ty,
                    crate::dynamics::normalize_angle(s.heading + phi),
                    s.speed,
                )
            };
            let after = pair_distance(&xf(&a), &geom(), &xf(&b), &geom());
            assert!((before - after).abs() < 1e-9, "{before} vs {after}");
        }
    }

    #[test]
    fn separation_is_monotone_along_line_of_centers() {
        // Monotone once the centers are farther apart than the combined
        // circle spread (2 * (h - w) = 2.2 m); below that a circle pair can
        // still be approaching its closest point.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let a = state(0.0, 0.0, rng.random_range(-3.1..3.1));
            let dir: f64 = rng.random_range(-3.1..3.1);
            let heading_b = rng.random_range(-3.1..3.1);
            let mut prev = f64::NEG_INFINITY;
            for k in 0..40 {
                let r = 2.3 + 0.25 * k as f64;
                let b = state(r * dir.cos(), r * dir.sin(), heading_b);
                let d = pair_distance(&a, &geom(), &b, &geom());
                assert!(d >= prev - 1e-9, "not monotone at r={r}: {d} < {prev}");
                prev = d;
            }
        }
    }

    #[test]
    fn is_safe_empty_set() {
        let check = is_safe(&state(0.0, 0.0, 0.0), &geom(), &[], 0.1);
        assert!(check.safe);
        assert!(check.margins.is_empty());
    }

    #[test]
    fn is_safe_overlap_fails() {
        let others = vec![(state(0.5, 0.0, 0.0), geom())];
        assert!(!is_safe(&state(0.0, 0.0, 0.0), &geom(), &others, 0.1).safe);
    }

    #[test]
    fn is_safe_boundary_inclusive() {
        // Tangent configuration has margin exactly 0; epsilon = 0 passes.
        let others = vec![(state(0.0, 1.8, 0.0), geom())];
        let check = is_safe(&state(0.0, 0.0, 0.0), &geom(), &others, 0.0);
        assert!(check.safe);
        assert!(check.margins[0].abs() < 1e-12);
    }

    #[test]
    fn min_gap_overlap_clamps_to_zero() {
        assert_eq!(
            euclidean_min_gap(&state(0.0, 0.0, 0.0), &geom(), &state(0.0, 0.0, 0.0), &geom()),
            0.0
        );
    }

    #[test]
    fn min_gap_lateral_offset() {
        let g = euclidean_min_gap(&state(0.0, 0.0, 0.0), &geom(), &state(0.0, 2.3, 0.0), &geom());
        assert!((g - 0.5).abs() < 1e-12, "gap = {g}");
    }

    #[test]
    fn min_gap_far_apart() {
        let g = euclidean_min_gap(&state(0.0, 0.0, 0.0), &geom(), &state(100.0, 0.0, 0.0), &geom());
        assert!((g - 96.0).abs() < 1e-12, "gap = {g}");
    }
}
