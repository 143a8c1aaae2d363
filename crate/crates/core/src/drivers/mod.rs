//! Simulated driver population.
//!
//! Each non-ego vehicle follows the intelligent driver model (IDM,
//! Treiber et al.) longitudinally and decides lane changes with MOBIL
//! (Kesting et al.). On top of plain car following, drivers react to a
//! vehicle intruding from a neighboring lane through two yield zones:
//!
//! - **Forced zone**: the intruder's body overlaps the corridor of the
//!   driver's own lane within `half_length + min_gap` (bumper gap) ahead.
//!   The driver must treat the intruder as its leader and brake.
//! - **Selective zone**: the intruder's center is in an adjacent lane within
//!   `zone_b_length + perception_shift` ahead. Whether the driver yields is
//!   a Bernoulli draw with probability `cooperativeness`, drawn once per
//!   intruder episode and held until the intruder leaves the zone.
//!
//! Driver parameters are sampled per vehicle from uniform ranges to get a
//! heterogeneous population.

mod world;

pub use world::{DriverVehicle, DriverWorld, EgoTrack, WorldConfig};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::BodyGeometry;
use crate::road::LaneLayout;
use crate::Point;

/// Gap fed to the IDM when there is no leader.
pub const FREE_ROAD_GAP: f64 = 1.0e6;

/// One driver's behavioral parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverParams {
    /// Desired free-road speed (m/s).
    pub desired_speed: f64,
    /// Safe time headway (s).
    pub time_headway: f64,
    /// Maximum acceleration (m/s^2).
    pub max_accel: f64,
    /// Comfortable deceleration (m/s^2); hard braking is twice this.
    pub comfort_decel: f64,
    /// IDM acceleration exponent.
    pub accel_exponent: f64,
    /// Minimum standstill gap to the leader (m).
    pub min_gap: f64,
    /// Probability of yielding to an intruder in the selective zone, in [0, 1].
    pub cooperativeness: f64,
    /// Perturbation of the selective-zone length (m); may be negative.
    pub perception_shift: f64,
    /// Body dimensions.
    pub geom: BodyGeometry,
}

/// Uniform sampling ranges for [`DriverParams`], one `[lo, hi]` pair per
/// behavioral parameter plus the fixed body dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub desired_speed: [f64; 2],
    pub time_headway: [f64; 2],
    pub max_accel: [f64; 2],
    pub comfort_decel: [f64; 2],
    pub accel_exponent: [f64; 2],
    pub min_gap: [f64; 2],
    pub cooperativeness: [f64; 2],
    pub perception_shift: [f64; 2],
    pub half_width: f64,
    pub half_length: f64,
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self {
            desired_speed: [2.0, 5.0],
            time_headway: [1.0, 2.0],
            max_accel: [2.5, 3.5],
            comfort_decel: [1.5, 2.5],
            accel_exponent: [3.5, 4.5],
            min_gap: [1.0, 3.0],
            cooperativeness: [0.0, 1.0],
            perception_shift: [-0.15, 0.15],
            half_width: 0.9,
            half_length: 2.0,
        }
    }
}

impl ParamRanges {
    /// Ranges with the cooperativeness pinned to a constant (regime rules).
    pub fn with_cooperativeness(mut self, eta: f64) -> Self {
        self.cooperativeness = [eta, eta];
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let pairs = [
            ("desired_speed", self.desired_speed),
            ("time_headway", self.time_headway),
            ("max_accel", self.max_accel),
            ("comfort_decel", self.comfort_decel),
            ("accel_exponent", self.accel_exponent),
            ("min_gap", self.min_gap),
            ("cooperativeness", self.cooperativeness),
            ("perception_shift", self.perception_shift),
        ];
        for (name, [lo, hi]) in pairs {
            if lo > hi {
                return Err(format!("driver range {name}: lo ({lo}) > hi ({hi})"));
            }
        }
        if self.cooperativeness[0] < 0.0 || self.cooperativeness[1] > 1.0 {
            return Err("driver range cooperativeness must stay within [0, 1]".into());
        }
        if self.half_length <= self.half_width || self.half_width <= 0.0 {
            return Err("driver body needs 0 < half_width < half_length".into());
        }
        Ok(())
    }
}

fn draw(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Sample one driver from uniform ranges. Parameters are drawn in field
/// order so a given RNG state always yields the same driver.
pub fn sample_driver(ranges: &ParamRanges, rng: &mut impl Rng) -> DriverParams {
    DriverParams {
        desired_speed: draw(rng, ranges.desired_speed),
        time_headway: draw(rng, ranges.time_headway),
        max_accel: draw(rng, ranges.max_accel),
        comfort_decel: draw(rng, ranges.comfort_decel),
        accel_exponent: draw(rng, ranges.accel_exponent),
        min_gap: draw(rng, ranges.min_gap),
        cooperativeness: draw(rng, ranges.cooperativeness),
        perception_shift: draw(rng, ranges.perception_shift),
        geom: BodyGeometry {
            half_width: ranges.half_width,
            half_length: ranges.half_length,
            ..BodyGeometry::default()
        },
    }
}

/// IDM car-following acceleration.
///
/// `a = a_max * (1 - (v/v0)^delta - (s*/s)^2)` with the desired gap
/// `s* = s0 + v*T + v*dv / (2*sqrt(a_max*b))`, clamped to
/// `[-2*comfort_decel, max_accel]`. `closing_rate` is own speed minus leader
/// speed. Pass [`FREE_ROAD_GAP`] when there is no leader; `gap` must be
/// positive.
pub fn idm_acceleration(speed: f64, gap: f64, closing_rate: f64, p: &DriverParams) -> f64 {
    idm_raw(speed, gap, closing_rate, p).clamp(-2.0 * p.comfort_decel, p.max_accel)
}

/// The IDM formula without the hard-braking clamp. Lane-change safety
/// checks use this, since the clamp would hide demanded decelerations that
/// exceed what the follower can comfortably do.
fn idm_raw(speed: f64, gap: f64, closing_rate: f64, p: &DriverParams) -> f64 {
    debug_assert!(gap > 0.0);
    let desired_gap = p.min_gap
        + speed * p.time_headway
        + speed * closing_rate / (2.0 * (p.max_accel * p.comfort_decel).sqrt());
    p.max_accel
        * (1.0 - (speed / p.desired_speed).powf(p.accel_exponent) - (desired_gap / gap).powi(2))
}

/// Longitudinal view of a vehicle as seen by a lane-change decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongitudinalView {
    /// Center position along the road (m).
    pub x: f64,
    pub speed: f64,
    pub half_length: f64,
}

impl LongitudinalView {
    /// Bumper-to-bumper gap from `self` (rear vehicle) to `front`.
    pub fn gap_to(&self, front: &LongitudinalView) -> f64 {
        (front.x - front.half_length) - (self.x + self.half_length)
    }
}

/// Leader/follower pair around a prospective slot in one lane.
#[derive(Debug, Clone, Copy, Default)]
pub struct LaneNeighbors {
    pub leader: Option<LongitudinalView>,
    /// Follower and its own driving parameters (needed to evaluate the
    /// braking it would incur).
    pub follower: Option<(LongitudinalView, DriverParams)>,
}

/// MOBIL decision constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilParams {
    /// Politeness factor weighting other drivers' gains.
    pub politeness: f64,
    /// Net acceleration gain required to bother changing (m/s^2).
    pub accel_threshold: f64,
    /// Maximum deceleration imposable on the new follower (m/s^2).
    pub safe_braking: f64,
}

impl Default for MobilParams {
    fn default() -> Self {
        Self { politeness: 0.5, accel_threshold: 0.1, safe_braking: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaneChange {
    Stay,
    Left,
    Right,
}

fn idm_toward(rear: &LongitudinalView, rear_params: &DriverParams, front: Option<&LongitudinalView>) -> f64 {
    match front {
        Some(f) => {
            let gap = rear.gap_to(f);
            if gap <= 0.0 {
                -2.0 * rear_params.comfort_decel
            } else {
                idm_acceleration(rear.speed, gap, rear.speed - f.speed, rear_params)
            }
        }
        None => idm_acceleration(rear.speed, FREE_ROAD_GAP, 0.0, rear_params),
    }
}

/// Evaluate one candidate target lane; returns the incentive gain if the
/// change is both safe and advantageous.
fn mobil_gain(
    me: &LongitudinalView,
    my_params: &DriverParams,
    current: &LaneNeighbors,
    target: &LaneNeighbors,
    mobil: &MobilParams,
) -> Option<f64> {
    // Safety: the new follower must not be forced to brake harder than the
    // allowed limit once we are its leader. Judged on the unclamped demand.
    let new_follower_after = match &target.follower {
        Some((f, fp)) => {
            let gap = f.gap_to(me);
            let demanded = if gap <= 0.0 {
                f64::NEG_INFINITY
            } else {
                idm_raw(f.speed, gap, f.speed - me.speed, fp)
            };
            if demanded < -mobil.safe_braking {
                return None;
            }
            idm_toward(f, fp, Some(me))
        }
        None => 0.0,
    };

    let own_before = idm_toward(me, my_params, current.leader.as_ref());
    let own_after = idm_toward(me, my_params, target.leader.as_ref());

    let new_follower_before = match &target.follower {
        Some((f, fp)) => idm_toward(f, fp, target.leader.as_ref()),
        None => 0.0,
    };
    // The old follower gains our slot: its leader becomes our old leader.
    let (old_follower_before, old_follower_after) = match &current.follower {
        Some((f, fp)) => (idm_toward(f, fp, Some(me)), idm_toward(f, fp, current.leader.as_ref())),
        None => (0.0, 0.0),
    };

    let gain = (own_after - own_before)
        + mobil.politeness
            * ((new_follower_after - new_follower_before)
                + (old_follower_after - old_follower_before));
    (gain > mobil.accel_threshold).then_some(gain)
}

/// MOBIL lane-change decision over the available adjacent lanes.
///
/// A change is taken only if the induced braking of the prospective new
/// follower stays within `safe_braking` and the politeness-weighted
/// acceleration gain exceeds `accel_threshold`; with both sides viable the
/// larger gain wins (ties go left).
pub fn mobil_lane_change(
    me: &LongitudinalView,
    my_params: &DriverParams,
    current: &LaneNeighbors,
    left: Option<&LaneNeighbors>,
    right: Option<&LaneNeighbors>,
    mobil: &MobilParams,
) -> LaneChange {
    let left_gain = left.and_then(|t| mobil_gain(me, my_params, current, t, mobil));
    let right_gain = right.and_then(|t| mobil_gain(me, my_params, current, t, mobil));
    match (left_gain, right_gain) {
        (None, None) => LaneChange::Stay,
        (Some(_), None) => LaneChange::Left,
        (None, Some(_)) => LaneChange::Right,
        (Some(l), Some(r)) => {
            if l >= r {
                LaneChange::Left
            } else {
                LaneChange::Right
            }
        }
    }
}

/// Which yield zone an intruder occupies relative to one driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YieldZone {
    None,
    /// Intruder blocks the driver's own lane corridor ahead.
    Forced,
    /// Intruder is in the adjacent-lane perception corridor.
    Selective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YieldDecision {
    pub zone: YieldZone,
    pub yielding: bool,
}

/// Classify an intruding vehicle against the yield zones of a driver in
/// `lane`. Bodies are treated as road-axis-aligned boxes; the drivers in
/// this simulation stay close to lane direction, so the approximation is
/// benign.
///
/// The zones are anchored to the driver's swept path (its body corridor
/// along the lane center), not the whole lane:
/// - An intruder whose body has fully entered the lane is an established
///   lane member and handled by plain car following, not the zones.
/// - The forced zone is the path corridor itself: a body overlapping it
///   just ahead physically blocks the driver.
/// - The selective zone is a perception strip reaching `zone_b_lateral`
///   beyond the path's edge, `zone_b_length` (plus the driver's perception
///   shift) ahead.
pub fn classify_zone(
    state_x: f64,
    params: &DriverParams,
    lane: usize,
    road: &LaneLayout,
    intruder_pos: Point,
    intruder_geom: &BodyGeometry,
    zone_b_length: f64,
    zone_b_lateral: f64,
) -> YieldZone {
    let [ix, iy] = intruder_pos;
    let offset = (iy - road.center(lane)).abs();
    // Behind, or body fully inside the lane (an established lane member).
    if ix <= state_x || offset + intruder_geom.half_width <= road.lane_width / 2.0 {
        return YieldZone::None;
    }
    let bumper_gap = (ix - intruder_geom.half_length) - (state_x + params.geom.half_length);
    // Clearance between the intruder's body and the driver's path corridor;
    // negative once the path is blocked.
    let lateral_clearance = offset - params.geom.half_width - intruder_geom.half_width;

    if lateral_clearance < 0.0 && bumper_gap <= params.geom.half_length + params.min_gap {
        return YieldZone::Forced;
    }
    if lateral_clearance <= zone_b_lateral && bumper_gap <= zone_b_length + params.perception_shift
    {
        return YieldZone::Selective;
    }
    YieldZone::None
}

/// Resolve the yield decision for one driver/intruder pair, threading the
/// held Bernoulli draw for the current zone episode. Returns the decision
/// and the updated hold (`None` once the intruder has left the zones).
#[allow(clippy::too_many_arguments)]
pub fn yield_decision(
    state_x: f64,
    params: &DriverParams,
    lane: usize,
    road: &LaneLayout,
    intruder_pos: Point,
    intruder_geom: &BodyGeometry,
    held: Option<bool>,
    zone_b_length: f64,
    zone_b_lateral: f64,
    rng: &mut impl Rng,
) -> (YieldDecision, Option<bool>) {
    let zone = classify_zone(
        state_x, params, lane, road, intruder_pos, intruder_geom, zone_b_length, zone_b_lateral,
    );
    match zone {
        YieldZone::None => (YieldDecision { zone, yielding: false }, None),
        YieldZone::Forced => (YieldDecision { zone, yielding: true }, held),
        YieldZone::Selective => {
            let hold = held.unwrap_or_else(|| rng.random_bool(params.cooperativeness));
            (YieldDecision { zone, yielding: hold }, Some(hold))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn midpoint_params() -> DriverParams {
        DriverParams {
            desired_speed: 3.5,
            time_headway: 1.5,
            max_accel: 3.0,
            comfort_decel: 2.0,
            accel_exponent: 4.0,
            min_gap: 2.0,
            cooperativeness: 0.5,
            perception_shift: 0.0,
            geom: BodyGeometry::default(),
        }
    }

    #[test]
    fn sampling_respects_ranges() {
        let ranges = ParamRanges::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let p = sample_driver(&ranges, &mut rng);
            assert!(p.desired_speed >= 2.0 && p.desired_speed < 5.0);
            assert!(p.time_headway >= 1.0 && p.time_headway < 2.0);
            assert!(p.max_accel >= 2.5 && p.max_accel < 3.5);
            assert!(p.comfort_decel >= 1.5 && p.comfort_decel < 2.5);
            assert!(p.accel_exponent >= 3.5 && p.accel_exponent < 4.5);
            assert!(p.min_gap >= 1.0 && p.min_gap < 3.0);
            assert!((0.0..1.0).contains(&p.cooperativeness));
            assert!(p.perception_shift >= -0.15 && p.perception_shift < 0.15);
            assert_eq!(p.geom.half_width, 0.9);
            assert_eq!(p.geom.half_length, 2.0);
        }
    }

    #[test]
    fn degenerate_range_yields_constant() {
        let ranges = ParamRanges::default().with_cooperativeness(0.37);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            assert_eq!(sample_driver(&ranges, &mut rng).cooperativeness, 0.37);
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let ranges = ParamRanges::default();
        let a = sample_driver(&ranges, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_driver(&ranges, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn idm_free_road_equilibrium() {
        let p = midpoint_params();
        let a = idm_acceleration(p.desired_speed, FREE_ROAD_GAP, 0.0, &p);
        assert!(a.abs() < 1e-9, "a = {a}");
    }

    #[test]
    fn idm_standstill_free_road() {
        let p = midpoint_params();
        let a = idm_acceleration(0.0, FREE_ROAD_GAP, 0.0, &p);
        assert!((a - p.max_accel).abs() < 1e-6, "a = {a}");
    }

    #[test]
    fn idm_matches_scalar_evaluation() {
        // v=3, gap=5, closing 1 m/s at midpoint parameters. The raw formula
        // yields -4.6896262808183025, below the hard-braking clamp of -4.
        let p = midpoint_params();
        let a = idm_acceleration(3.0, 5.0, 1.0, &p);
        assert_eq!(a, -4.0);
        // Wider gap so the clamp is inactive: recompute the formula here.
        let gap = 12.0;
        let desired = 2.0 + 3.0 * 1.5 + 3.0 * 1.0 / (2.0 * (3.0f64 * 2.0).sqrt());
        let expected = 3.0 * (1.0 - (3.0f64 / 3.5).powf(4.0) - (desired / gap).powi(2));
        let got = idm_acceleration(3.0, gap, 1.0, &p);
        assert!((got - expected).abs() < 1e-12);
    }

    fn view(x: f64, speed: f64) -> LongitudinalView {
        LongitudinalView { x, speed, half_length: 2.0 }
    }

    #[test]
    fn mobil_changes_into_empty_lane_when_blocked() {
        let p = midpoint_params();
        let me = view(0.0, 3.0);
        // Slow leader right ahead; empty target lane.
        let current = LaneNeighbors { leader: Some(view(7.0, 0.5)), follower: None };
        let target = LaneNeighbors::default();
        let d = mobil_lane_change(&me, &p, &current, Some(&target), None, &MobilParams::default());
        assert_eq!(d, LaneChange::Left);
    }

    #[test]
    fn mobil_respects_follower_safety() {
        let p = midpoint_params();
        let me = view(0.0, 1.0);
        let current = LaneNeighbors { leader: Some(view(6.0, 0.0)), follower: None };
        // Fast follower immediately behind the slot.
        let target = LaneNeighbors { leader: None, follower: Some((view(-4.5, 5.0), midpoint_params())) };
        let d = mobil_lane_change(&me, &p, &current, Some(&target), None, &MobilParams::default());
        assert_eq!(d, LaneChange::Stay);
    }

    #[test]
    fn mobil_stays_when_lanes_are_identical() {
        let p = midpoint_params();
        let me = view(0.0, 3.0);
        let nbrs = LaneNeighbors { leader: Some(view(15.0, 3.0)), follower: None };
        let d = mobil_lane_change(&me, &p, &nbrs, Some(&nbrs.clone()), Some(&nbrs.clone()), &MobilParams::default());
        assert_eq!(d, LaneChange::Stay);
    }

    fn road() -> LaneLayout {
        LaneLayout::default()
    }

    #[test]
    fn forced_zone_when_body_blocks_path() {
        // Driver in lane 1 (center 3.7); intruder cutting in at y = 2.2:
        // body spans up to 3.1, overlapping the driver's path corridor
        // (3.7 - 1.8 = 1.9), but not yet fully inside the lane.
        let p = midpoint_params();
        let zone = classify_zone(0.0, &p, 1, &road(), [4.0, 2.2], &BodyGeometry::default(), 6.0, 0.9);
        assert_eq!(zone, YieldZone::Forced);
    }

    #[test]
    fn established_lane_member_is_not_an_intruder() {
        // Body fully inside the lane: plain car following, no yield zone.
        let p = midpoint_params();
        let zone = classify_zone(0.0, &p, 1, &road(), [4.0, 3.2], &BodyGeometry::default(), 6.0, 0.9);
        assert_eq!(zone, YieldZone::None);
    }

    #[test]
    fn selective_zone_in_adjacent_lane() {
        let p = midpoint_params();
        // Intruder nosing toward the path, 5 m bumper gap ahead: path edge
        // clearance |1.4 - 3.7| - 1.8 = 0.5, within the 0.9 strip.
        let zone = classify_zone(0.0, &p, 1, &road(), [9.0, 1.4], &BodyGeometry::default(), 6.0, 0.9);
        assert_eq!(zone, YieldZone::Selective);
        // Centered in its own lane: outside the perception strip.
        let zone = classify_zone(0.0, &p, 1, &road(), [9.0, 0.0], &BodyGeometry::default(), 6.0, 0.9);
        assert_eq!(zone, YieldZone::None);
    }

    #[test]
    fn no_zone_behind_or_far() {
        let p = midpoint_params();
        let g = BodyGeometry::default();
        assert_eq!(classify_zone(0.0, &p, 1, &road(), [-3.0, 1.4], &g, 6.0, 0.9), YieldZone::None);
        assert_eq!(classify_zone(0.0, &p, 1, &road(), [30.0, 1.4], &g, 6.0, 0.9), YieldZone::None);
        // Two lanes over is outside perception.
        assert_eq!(classify_zone(0.0, &p, 0, &road(), [5.0, 7.4], &g, 6.0, 0.9), YieldZone::None);
    }

    #[test]
    fn fully_cooperative_always_yields_selective() {
        let mut p = midpoint_params();
        p.cooperativeness = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (d, hold) =
            yield_decision(0.0, &p, 1, &road(), [9.0, 1.4], &BodyGeometry::default(), None, 6.0, 0.9, &mut rng);
        assert_eq!(d.zone, YieldZone::Selective);
        assert!(d.yielding);
        assert_eq!(hold, Some(true));
    }

    #[test]
    fn aggressive_never_yields_selective() {
        let mut p = midpoint_params();
        p.cooperativeness = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (d, hold) =
            yield_decision(0.0, &p, 1, &road(), [9.0, 1.4], &BodyGeometry::default(), None, 6.0, 0.9, &mut rng);
        assert!(!d.yielding);
        assert_eq!(hold, Some(false));
    }

    #[test]
    fn forced_zone_dominates_cooperativeness() {
        for eta in [0.0, 0.5, 1.0] {
            let mut p = midpoint_params();
            p.cooperativeness = eta;
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let (d, _) = yield_decision(
                0.0, &p, 1, &road(), [4.0, 2.2], &BodyGeometry::default(), None, 6.0, 0.9, &mut rng,
            );
            assert_eq!(d.zone, YieldZone::Forced);
            assert!(d.yielding, "eta_c = {eta} must still yield in the forced zone");
        }
    }

    #[test]
    fn selective_draw_is_held_for_the_episode() {
        let mut p = midpoint_params();
        p.cooperativeness = 0.5;
        let g = BodyGeometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (first, hold) = yield_decision(0.0, &p, 1, &road(), [9.0, 1.4], &g, None, 6.0, 0.9, &mut rng);
        // Same episode: decision must repeat regardless of fresh RNG state.
        for _ in 0..20 {
            let (again, hold2) =
                yield_decision(0.0, &p, 1, &road(), [8.0, 1.4], &g, hold, 6.0, 0.9, &mut rng);
            assert_eq!(again.yielding, first.yielding);
            assert_eq!(hold2, hold);
        }
        // Leaving the zone clears the hold.
        let (_, cleared) = yield_decision(0.0, &p, 1, &road(), [40.0, 1.4], &g, hold, 6.0, 0.9, &mut rng);
        assert_eq!(cleared, None);
    }

    #[test]
    fn yield_frequency_tracks_cooperativeness() {
        // Small-sample version of the statistical acceptance check.
        let g = BodyGeometry::default();
        for eta in [0.2, 0.8] {
            let mut p = midpoint_params();
            p.cooperativeness = eta;
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let n = 1000;
            let mut yields = 0;
            for _ in 0..n {
                let (d, _) = yield_decision(0.0, &p, 1, &road(), [9.0, 1.4], &g, None, 6.0, 0.9, &mut rng);
                if d.yielding {
                    yields += 1;
                }
            }
            let freq = yields as f64 / n as f64;
            let sigma = (eta * (1.0 - eta) / n as f64).sqrt();
            assert!((freq - eta).abs() <= 3.0 * sigma, "eta={eta}: freq={freq}");
        }
    }
}
