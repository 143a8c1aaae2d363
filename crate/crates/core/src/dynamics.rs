//! Kinematic single-track (bicycle) vehicle model.
//!
//! All vehicles in the simulation, ego and traffic alike, move according to
//! the same continuous kinematics discretized with a single forward-Euler
//! step per tick:
//!
//! ```text
//! x'   = v cos(psi + beta)
//! y'   = v sin(psi + beta)
//! psi' = v / l_r * sin(beta)
//! v'   = a
//! beta = atan(l_r / (l_f + l_r) * tan(delta))
//! ```
//!
//! Speed is clamped to zero after integration (vehicles stop, they never
//! reverse) and the heading is renormalized into `(-pi, pi]`.

use serde::{Deserialize, Serialize};

use crate::geometry::GeometryError;

/// Pose and speed of one vehicle: position of the body center, inertial
/// heading and scalar speed along the heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// Longitudinal position of the vehicle center (m).
    pub x: f64,
    /// Lateral position of the vehicle center (m). Positive is to the left.
    pub y: f64,
    /// Inertial heading (rad), normalized to `(-pi, pi]`. Zero points along +x.
    pub heading: f64,
    /// Speed (m/s), never negative.
    pub speed: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, heading: f64, speed: f64) -> Self {
        Self { x, y, heading, speed }
    }

    /// Center position as a point.
    pub fn position(&self) -> crate::Point {
        [self.x, self.y]
    }
}

/// Control pair applied over one step: acceleration of the vehicle center
/// and front-wheel steering angle. Positive steering turns left.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    /// Acceleration (m/s^2).
    pub accel: f64,
    /// Front-wheel steering angle (rad).
    pub steer: f64,
}

impl ControlInput {
    pub fn new(accel: f64, steer: f64) -> Self {
        Self { accel, steer }
    }
}

/// Physical dimensions of a vehicle body.
///
/// `half_length > half_width` is required: the three-circle footprint in
/// [`crate::geometry`] places the outer circle centers `half_length -
/// half_width` away from the body center and degenerates otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyGeometry {
    /// Distance from the body center to the front axle (m).
    pub front_axle: f64,
    /// Distance from the body center to the rear axle (m).
    pub rear_axle: f64,
    /// Half width of the body (m).
    pub half_width: f64,
    /// Half length of the body (m).
    pub half_length: f64,
}

impl BodyGeometry {
    pub fn new(
        front_axle: f64,
        rear_axle: f64,
        half_width: f64,
        half_length: f64,
    ) -> Result<Self, GeometryError> {
        let geom = Self { front_axle, rear_axle, half_width, half_length };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.front_axle > 0.0 && self.rear_axle > 0.0 && self.half_width > 0.0) {
            return Err(GeometryError::NonPositiveDimension);
        }
        if self.half_length <= self.half_width {
            return Err(GeometryError::DegenerateFootprint {
                half_length: self.half_length,
                half_width: self.half_width,
            });
        }
        Ok(())
    }
}

impl Default for BodyGeometry {
    /// Nominal passenger car: 4 m long, 1.8 m wide, axles 1.45 m from center.
    fn default() -> Self {
        Self { front_axle: 1.45, rear_axle: 1.45, half_width: 0.9, half_length: 2.0 }
    }
}

/// Normalize an angle into `(-pi, pi]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle % std::f64::consts::TAU;
    if a <= -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    } else if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    }
    a
}

/// Velocity slip angle at the body center for a given steering angle.
///
/// `beta = atan(l_r / (l_f + l_r) * tan(delta))`; odd in `delta`.
/// Caller keeps `|delta| < pi/2`.
pub fn slip_angle(geom: &BodyGeometry, steer: f64) -> f64 {
    let ratio = geom.rear_axle / (geom.front_axle + geom.rear_axle);
    (ratio * steer.tan()).atan()
}

/// Continuous-time state derivative `(x', y', psi', v')`.
pub fn derivative(state: &VehicleState, input: &ControlInput, geom: &BodyGeometry) -> [f64; 4] {
    let beta = slip_angle(geom, input.steer);
    let course = state.heading + beta;
    [
        state.speed * course.cos(),
        state.speed * course.sin(),
        state.speed / geom.rear_axle * beta.sin(),
        input.accel,
    ]
}

/// One forward-Euler step of length `dt`.
///
/// Speed is clamped to zero afterwards and the heading renormalized, so the
/// returned state always satisfies the [`VehicleState`] invariants.
pub fn step(state: &VehicleState, input: &ControlInput, geom: &BodyGeometry, dt: f64) -> VehicleState {
    debug_assert!(dt > 0.0);
    let d = derivative(state, input, geom);
    VehicleState {
        x: state.x + dt * d[0],
        y: state.y + dt * d[1],
        heading: normalize_angle(state.heading + dt * d[2]),
        speed: (state.speed + dt * d[3]).max(0.0),
    }
}

/// Integrate a fixed control over `duration` using `n_sub` equal Euler
/// sub-steps. Test-only reference trajectories use this with a large
/// `n_sub`; the simulation itself always takes single steps.
pub fn integrate(
    state: &VehicleState,
    input: &ControlInput,
    geom: &BodyGeometry,
    duration: f64,
    n_sub: usize,
) -> VehicleState {
    let dt = duration / n_sub as f64;
    let mut s = *state;
    for _ in 0..n_sub {
        s = step(&s, input, geom, dt);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = 1e-12;

    fn geom() -> BodyGeometry {
        BodyGeometry::default()
    }

    #[test]
    fn slip_angle_zero_steer() {
        assert_eq!(slip_angle(&geom(), 0.0), 0.0);
    }

    #[test]
    fn slip_angle_is_odd() {
        let g = geom();
        for d in [0.05, 0.13, 0.29] {
            assert!((slip_angle(&g, -d) + slip_angle(&g, d)).abs() < EPS);
        }
    }

    #[test]
    fn slip_angle_equal_axles() {
        // atan(0.5 * tan(0.3)) evaluated independently.
        let g = BodyGeometry::new(1.45, 1.45, 0.9, 2.0).unwrap();
        let beta = slip_angle(&g, 0.3);
        assert!((beta - 0.15345219489184944).abs() < EPS, "beta = {beta}");
    }

    #[test]
    fn derivative_at_standstill() {
        let s = VehicleState::new(3.0, -1.0, 0.7, 0.0);
        let d = derivative(&s, &ControlInput::new(2.0, 0.25), &geom());
        assert_eq!(d, [0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn derivative_straight_line() {
        let s = VehicleState::new(0.0, 0.0, 0.0, 10.0);
        let d = derivative(&s, &ControlInput::new(0.0, 0.0), &geom());
        assert_eq!(d, [10.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn derivative_matches_scalar_evaluation() {
        // v=5, psi=0, delta=0.2, l_f=l_r=1.45, a=1; values computed with an
        // independent scalar calculator.
        let g = BodyGeometry::new(1.45, 1.45, 0.9, 2.0).unwrap();
        let s = VehicleState::new(0.0, 0.0, 0.0, 5.0);
        let d = derivative(&s, &ControlInput::new(1.0, 0.2), &g);
        assert!((d[0] - 4.97451409317562).abs() < 1e-12);
        assert!((d[1] - 0.5041919642330108).abs() < 1e-12);
        assert!((d[2] - 0.3477185960227661).abs() < 1e-12);
        assert_eq!(d[3], 1.0);
    }

    #[test]
    fn step_advances_straight() {
        let s = VehicleState::new(1.0, 2.0, 0.0, 5.0);
        let next = step(&s, &ControlInput::new(0.0, 0.0), &geom(), 0.4);
        assert!((next.x - 3.0).abs() < EPS);
        assert_eq!(next.y, 2.0);
        assert_eq!(next.heading, 0.0);
        assert_eq!(next.speed, 5.0);
    }

    #[test]
    fn step_speed_update_table_values() {
        // dt = 0.4, full throttle from 10 m/s: v' = 10 + 3.5 * 0.4 = 11.4.
        let s = VehicleState::new(0.0, 0.0, 0.0, 10.0);
        let next = step(&s, &ControlInput::new(3.5, 0.0), &geom(), 0.4);
        assert!((next.speed - 11.4).abs() < EPS);
    }

    #[test]
    fn step_clamps_speed_at_zero() {
        let s = VehicleState::new(0.0, 0.0, 0.0, 0.5);
        let next = step(&s, &ControlInput::new(-4.0, 0.0), &geom(), 0.4);
        assert_eq!(next.speed, 0.0);
    }

    #[test]
    fn step_normalizes_heading() {
        let s = VehicleState::new(0.0, 0.0, 3.1, 8.0);
        let next = step(&s, &ControlInput::new(0.0, 0.3), &geom(), 0.4);
        assert!(next.heading > -std::f64::consts::PI && next.heading <= std::f64::consts::PI);
    }

    #[test]
    fn euler_error_shrinks_linearly() {
        // First-order method: halving dt twice roughly halves the endpoint
        // error against a fine reference each time.
        let g = geom();
        let s = VehicleState::new(0.0, 0.0, 0.1, 8.0);
        let u = ControlInput::new(1.0, 0.2);
        let reference = integrate(&s, &u, &g, 0.8, 80_000);
        let err = |dt: f64| {
            let n = (0.8 / dt).round() as usize;
            let mut cur = s;
            for _ in 0..n {
                cur = step(&cur, &u, &g, dt);
            }
            ((cur.x - reference.x).powi(2) + (cur.y - reference.y).powi(2)).sqrt()
        };
        let (e1, e2, e3) = (err(0.4), err(0.2), err(0.1));
        assert!(e2 < e1 && e3 < e2, "errors not shrinking: {e1} {e2} {e3}");
        // Ratio near 2 for a first-order method; allow generous slack.
        assert!(e1 / e2 > 1.5 && e1 / e2 < 3.0, "ratio {}", e1 / e2);
        assert!(e2 / e3 > 1.5 && e2 / e3 < 3.0, "ratio {}", e2 / e3);
    }

    #[test]
    fn mirror_symmetry_randomized() {
        let g = geom();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let s = VehicleState::new(
                rng.random_range(-50.0..50.0),
                rng.random_range(-8.0..8.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..15.0),
            );
            let u = ControlInput::new(rng.random_range(-4.0..3.5), rng.random_range(-0.3..0.3));
            let a = step(&s, &u, &g, 0.4);
            let mirrored = VehicleState::new(s.x, -s.y, -s.heading, s.speed);
            let b = step(&mirrored, &ControlInput::new(u.accel, -u.steer), &g, 0.4);
            assert!((a.x - b.x).abs() < EPS);
            assert!((a.y + b.y).abs() < EPS);
            assert!((a.heading + b.heading).abs() < EPS);
            assert!((a.speed - b.speed).abs() < EPS);
        }
    }

    #[test]
    fn geometry_rejects_degenerate_shapes() {
        assert!(BodyGeometry::new(1.0, 1.0, 0.9, 0.9).is_err());
        assert!(BodyGeometry::new(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(BodyGeometry::new(-1.0, 1.0, 0.9, 2.0).is_err());
        assert!(BodyGeometry::new(1.45, 1.45, 0.9, 2.0).is_ok());
    }
}
