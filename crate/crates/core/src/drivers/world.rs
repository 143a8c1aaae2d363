//! Closed-loop simulation of the driver population.
//!
//! [`DriverWorld`] owns every non-ego vehicle and advances them one tick at
//! a time. The ego vehicle is represented only through its observed position
//! track: drivers perceive it exactly the way predictors do, as a sequence
//! of center positions, with its speed recovered by finite differences.
//! Because of that, cloning the world and feeding it a hypothetical ego
//! position sequence reproduces bit-for-bit what the real world would do if
//! the ego actually drove there, which is what the ground-truth predictor
//! relies on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{self, BodyGeometry, ControlInput, VehicleState};
use crate::road::LaneLayout;
use crate::Point;

use super::{
    idm_acceleration, mobil_lane_change, sample_driver, yield_decision, DriverParams, LaneChange,
    LaneNeighbors, LongitudinalView, MobilParams, ParamRanges, FREE_ROAD_GAP,
};

/// Tunables of the driver population that are not per-driver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    /// Amplitude of the uniform per-step acceleration noise (m/s^2); 0 off.
    pub accel_noise: f64,
    /// Amplitude of the lateral center-position oscillation (m); 0 off.
    pub lateral_osc_amp: f64,
    /// Period of the lateral oscillation (s).
    pub lateral_osc_period: f64,
    /// Base length of the selective yield zone (m).
    pub zone_b_length: f64,
    /// Lateral perception reach of the selective zone beyond the driver's
    /// lane boundary (m).
    pub zone_b_lateral: f64,
    /// Steering feedback gain on lateral offset (rad/m).
    pub steer_gain_lateral: f64,
    /// Steering feedback gain on heading error (rad/rad).
    pub steer_gain_heading: f64,
    /// Steering saturation (rad).
    pub steer_limit: f64,
    pub mobil: MobilParams,
    /// Whether drivers may change lanes via MOBIL.
    pub lane_changes: bool,
    /// Vehicles beyond this x wrap out and respawn upstream; infinity off.
    pub despawn_x: f64,
    /// Upstream x used when a respawning vehicle has no lane mates.
    pub respawn_fallback_x: f64,
    /// Sampling ranges for respawned drivers (carries the regime's
    /// cooperativeness rule).
    pub ranges: ParamRanges,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            accel_noise: 0.3,
            lateral_osc_amp: 0.03,
            lateral_osc_period: 4.0,
            zone_b_length: 6.0,
            zone_b_lateral: 0.9,
            steer_gain_lateral: 0.08,
            steer_gain_heading: 0.55,
            steer_limit: 0.3,
            mobil: MobilParams::default(),
            lane_changes: false,
            despawn_x: f64::INFINITY,
            respawn_fallback_x: -30.0,
            ranges: ParamRanges::default(),
        }
    }
}

/// One simulated vehicle.
#[derive(Debug, Clone)]
pub struct DriverVehicle {
    pub state: VehicleState,
    pub params: DriverParams,
    /// Lane the driver is keeping (or steering toward after a change).
    pub lane: usize,
    /// Stationary obstacles never move (road dead-end marker).
    pub stationary: bool,
    /// Pace vehicles cap the lane's flow; they drive normally but never
    /// wrap around.
    pub pace: bool,
    /// Bumped on every respawn; observers reset position history on change.
    pub generation: u32,
    rng: ChaCha8Rng,
    yield_hold: Option<bool>,
    osc_phase: f64,
}

impl DriverVehicle {
    pub fn yield_hold(&self) -> Option<bool> {
        self.yield_hold
    }
}

/// Observed ego position track (current and previous step).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoTrack {
    pub pos: Point,
    pub prev: Point,
    pub geom: BodyGeometry,
}

#[derive(Clone, Copy)]
struct EgoView {
    pos: Point,
    speed: f64,
    geom: BodyGeometry,
}

#[derive(Clone, Copy)]
struct Snap {
    x: f64,
    speed: f64,
    lane: usize,
    half_length: f64,
    params: DriverParams,
}

/// The full driver-side world state. Cheap to clone; rollout candidates
/// clone it freely.
#[derive(Debug, Clone)]
pub struct DriverWorld {
    pub road: LaneLayout,
    pub dt: f64,
    pub t: f64,
    pub vehicles: Vec<DriverVehicle>,
    pub ego: Option<EgoTrack>,
    pub cfg: WorldConfig,
    spawn_rng: ChaCha8Rng,
}

impl DriverWorld {
    pub fn new(road: LaneLayout, dt: f64, cfg: WorldConfig, spawn_rng: ChaCha8Rng) -> Self {
        Self { road, dt, t: 0.0, vehicles: Vec::new(), ego: None, cfg, spawn_rng }
    }

    pub fn add_vehicle(
        &mut self,
        state: VehicleState,
        params: DriverParams,
        lane: usize,
        mut rng: ChaCha8Rng,
    ) -> usize {
        let osc_phase = rng.random_range(0.0..std::f64::consts::TAU);
        self.vehicles.push(DriverVehicle {
            state,
            params,
            lane,
            stationary: false,
            pace: false,
            generation: 0,
            rng,
            yield_hold: None,
            osc_phase,
        });
        self.vehicles.len() - 1
    }

    /// Add a flow-capping pace vehicle: drives like any other but is exempt
    /// from wrap-around.
    pub fn add_pace_vehicle(
        &mut self,
        state: VehicleState,
        params: DriverParams,
        lane: usize,
        rng: ChaCha8Rng,
    ) -> usize {
        let i = self.add_vehicle(state, params, lane, rng);
        self.vehicles[i].pace = true;
        i
    }

    pub fn add_stationary(&mut self, state: VehicleState, params: DriverParams, lane: usize) -> usize {
        self.vehicles.push(DriverVehicle {
            state: VehicleState { speed: 0.0, ..state },
            params,
            lane,
            stationary: true,
            pace: false,
            generation: 0,
            rng: ChaCha8Rng::seed_from_u64(0),
            yield_hold: None,
            osc_phase: 0.0,
        });
        self.vehicles.len() - 1
    }

    /// Register the ego's observed position (history starts degenerate).
    pub fn set_ego(&mut self, pos: Point, geom: BodyGeometry) {
        self.ego = Some(EgoTrack { pos, prev: pos, geom });
    }

    fn ego_view(&self) -> Option<EgoView> {
        self.ego.as_ref().map(|track| {
            let dx = track.pos[0] - track.prev[0];
            let dy = track.pos[1] - track.prev[1];
            EgoView { pos: track.pos, speed: (dx * dx + dy * dy).sqrt() / self.dt, geom: track.geom }
        })
    }

    fn snapshot(&self) -> Vec<Snap> {
        self.vehicles
            .iter()
            .map(|v| Snap {
                x: v.state.x,
                speed: v.state.speed,
                lane: v.lane,
                half_length: v.params.geom.half_length,
                params: v.params,
            })
            .collect()
    }

    /// Advance one tick. Drivers react to the snapshot at the current time,
    /// including the ego's current observed position; afterwards the ego
    /// track rolls forward to `ego_next` (when provided).
    pub fn step(&mut self, ego_next: Option<Point>) {
        let snap = self.snapshot();
        let ego_view = self.ego_view();
        let n = self.vehicles.len();
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            if self.vehicles[i].stationary {
                next.push(self.vehicles[i].state);
                continue;
            }
            let input = Self::control_for(
                &mut self.vehicles[i],
                i,
                &snap,
                ego_view.as_ref(),
                &self.road,
                &self.cfg,
                self.t,
            );
            next.push(dynamics::step(
                &self.vehicles[i].state,
                &input,
                &self.vehicles[i].params.geom,
                self.dt,
            ));
        }
        for (v, s) in self.vehicles.iter_mut().zip(next) {
            v.state = s;
        }
        self.t += self.dt;
        if let Some(track) = self.ego.as_mut() {
            if let Some(pos) = ego_next {
                track.prev = track.pos;
                track.pos = pos;
            }
        }
        self.respawn_pass();
    }

    /// Control decision for one driver against the current world snapshot.
    /// This is the same policy `step` applies to every driver.
    pub fn driver_control(&mut self, index: usize) -> ControlInput {
        let snap = self.snapshot();
        let ego_view = self.ego_view();
        let (road, cfg, t) = (self.road, self.cfg.clone(), self.t);
        Self::control_for(&mut self.vehicles[index], index, &snap, ego_view.as_ref(), &road, &cfg, t)
    }

    #[allow(clippy::too_many_arguments)]
    fn control_for(
        veh: &mut DriverVehicle,
        index: usize,
        snap: &[Snap],
        ego: Option<&EgoView>,
        road: &LaneLayout,
        cfg: &WorldConfig,
        t: f64,
    ) -> ControlInput {
        let me = &veh.state;
        let p = veh.params;

        // Nearest same-lane leader among the other drivers.
        let mut leader: Option<(f64, f64)> = None; // (bumper gap, speed)
        for (j, other) in snap.iter().enumerate() {
            if j == index || other.lane != veh.lane || other.x <= me.x {
                continue;
            }
            let gap = (other.x - other.half_length) - (me.x + p.geom.half_length);
            if leader.map_or(true, |(g, _)| gap < g) {
                leader = Some((gap, other.speed));
            }
        }

        // Ego interaction. A merged ego (center in this lane) is a plain
        // car-following leader. An intruding ego engages the yield zones:
        // a yielding driver brakes to a stop and waits, on top of whatever
        // its queue demands.
        let mut yielding = false;
        if let Some(ev) = ego {
            let (decision, hold) = yield_decision(
                me.x,
                &p,
                veh.lane,
                road,
                ev.pos,
                &ev.geom,
                veh.yield_hold,
                cfg.zone_b_length,
                cfg.zone_b_lateral,
                &mut veh.rng,
            );
            veh.yield_hold = hold;
            yielding = decision.yielding;
            // The ego is a leader to brake for when it has entered the lane
            // far enough to be a member or to block this driver's path,
            // or when the driver decided to yield to it.
            let offset = (ev.pos[1] - road.center(veh.lane)).abs();
            let member = offset + ev.geom.half_width <= road.lane_width / 2.0;
            let blocks_path = offset < p.geom.half_width + ev.geom.half_width;
            if ev.pos[0] > me.x && (decision.yielding || member || blocks_path) {
                let gap = (ev.pos[0] - ev.geom.half_length) - (me.x + p.geom.half_length);
                if leader.map_or(true, |(g, _)| gap < g) {
                    leader = Some((gap, ev.speed));
                }
            }
        }

        let mut accel = match leader {
            Some((gap, _)) if gap <= 0.0 => -2.0 * p.comfort_decel,
            Some((gap, lead_speed)) => idm_acceleration(me.speed, gap, me.speed - lead_speed, &p),
            None => idm_acceleration(me.speed, FREE_ROAD_GAP, 0.0, &p),
        };
        if yielding {
            // Stop and wait for the intruder.
            accel = accel.min(-p.comfort_decel);
        }
        if cfg.accel_noise > 0.0 {
            accel += veh.rng.random_range(-cfg.accel_noise..=cfg.accel_noise);
            accel = accel.clamp(-2.0 * p.comfort_decel, p.max_accel);
        }

        if cfg.lane_changes {
            let me_view = LongitudinalView { x: me.x, speed: me.speed, half_length: p.geom.half_length };
            let neighbors = |lane: usize| -> LaneNeighbors {
                let mut out = LaneNeighbors::default();
                for (j, other) in snap.iter().enumerate() {
                    if j == index || other.lane != lane {
                        continue;
                    }
                    let view = LongitudinalView {
                        x: other.x,
                        speed: other.speed,
                        half_length: other.half_length,
                    };
                    if other.x > me.x {
                        if out.leader.map_or(true, |l| view.x < l.x) {
                            out.leader = Some(view);
                        }
                    } else if out.follower.as_ref().map_or(true, |(f, _)| view.x > f.x) {
                        out.follower = Some((view, other.params));
                    }
                }
                out
            };
            let current = neighbors(veh.lane);
            let left = (veh.lane + 1 < road.lane_count).then(|| neighbors(veh.lane + 1));
            let right = veh.lane.checked_sub(1).map(neighbors);
            match mobil_lane_change(
                &me_view,
                &p,
                &current,
                left.as_ref(),
                right.as_ref(),
                &cfg.mobil,
            ) {
                LaneChange::Left => veh.lane += 1,
                LaneChange::Right => veh.lane -= 1,
                LaneChange::Stay => {}
            }
        }

        let mut y_ref = road.center(veh.lane);
        if cfg.lateral_osc_amp > 0.0 {
            y_ref += cfg.lateral_osc_amp
                * (std::f64::consts::TAU * t / cfg.lateral_osc_period + veh.osc_phase).sin();
        }
        let steer = (cfg.steer_gain_lateral * (y_ref - me.y)
            - cfg.steer_gain_heading * me.heading)
            .clamp(-cfg.steer_limit, cfg.steer_limit);

        ControlInput::new(accel, steer)
    }

    fn respawn_pass(&mut self) {
        if !self.cfg.despawn_x.is_finite() {
            return;
        }
        for i in 0..self.vehicles.len() {
            if self.vehicles[i].stationary
                || self.vehicles[i].pace
                || self.vehicles[i].state.x <= self.cfg.despawn_x
            {
                continue;
            }
            let lane = self.vehicles[i].lane;
            let rear = self
                .vehicles
                .iter()
                .enumerate()
                .filter(|(j, v)| *j != i && v.lane == lane && !v.stationary)
                .map(|(_, v)| v.state.x)
                .fold(f64::INFINITY, f64::min);
            let rear = if rear.is_finite() { rear } else { self.cfg.respawn_fallback_x };
            let gap = self.spawn_rng.random_range(
                self.cfg.ranges.min_gap[0]..=self.cfg.ranges.min_gap[1].max(self.cfg.ranges.min_gap[0]),
            );
            let params = sample_driver(&self.cfg.ranges, &mut self.spawn_rng);
            let x = rear - (2.0 * params.geom.half_length + gap);
            let v = &mut self.vehicles[i];
            v.params = params;
            v.state = VehicleState::new(x, self.road.center(lane), 0.0, 0.0);
            v.yield_hold = None;
            v.generation += 1;
            v.osc_phase = self.spawn_rng.random_range(0.0..std::f64::consts::TAU);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivers::ParamRanges;

    fn quiet_cfg() -> WorldConfig {
        WorldConfig { accel_noise: 0.0, lateral_osc_amp: 0.0, ..WorldConfig::default() }
    }

    fn params() -> DriverParams {
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

    fn world(cfg: WorldConfig) -> DriverWorld {
        DriverWorld::new(LaneLayout::default(), 0.4, cfg, ChaCha8Rng::seed_from_u64(99))
    }

    #[test]
    fn equilibrium_driver_holds_course() {
        let mut w = world(quiet_cfg());
        let p = params();
        w.add_vehicle(
            VehicleState::new(0.0, 3.7, 0.0, p.desired_speed),
            p,
            1,
            ChaCha8Rng::seed_from_u64(1),
        );
        let u = w.driver_control(0);
        assert!(u.accel.abs() < 1e-6, "accel = {}", u.accel);
        assert!(u.steer.abs() < 1e-9, "steer = {}", u.steer);
    }

    #[test]
    fn free_road_converges_to_desired_speed() {
        let mut w = world(quiet_cfg());
        let p = params();
        w.add_vehicle(VehicleState::new(0.0, 3.7, 0.0, 0.0), p, 1, ChaCha8Rng::seed_from_u64(2));
        for _ in 0..150 {
            w.step(None);
        }
        let v = w.vehicles[0].state.speed;
        assert!(
            (v - p.desired_speed).abs() / p.desired_speed < 0.01,
            "speed {v} vs desired {}",
            p.desired_speed
        );
    }

    #[test]
    fn yielding_driver_brakes_for_close_intruder() {
        let mut w = world(quiet_cfg());
        let mut p = params();
        p.cooperativeness = 1.0;
        w.add_vehicle(VehicleState::new(0.0, 3.7, 0.0, 3.0), p, 1, ChaCha8Rng::seed_from_u64(3));
        // Intruder 4 m ahead, encroaching from the merge lane.
        w.set_ego([4.0, 1.9], BodyGeometry::default());
        let u = w.driver_control(0);
        assert!(u.accel < -1.0, "expected braking, got {}", u.accel);
    }

    #[test]
    fn offset_driver_steers_toward_lane_center() {
        let mut w = world(quiet_cfg());
        let p = params();
        // Half a meter right of center: positive steering corrects left.
        w.add_vehicle(VehicleState::new(0.0, 3.2, 0.0, 3.0), p, 1, ChaCha8Rng::seed_from_u64(4));
        let u = w.driver_control(0);
        assert!(u.steer > 0.0);
        // And mirrored.
        w.vehicles[0].state.y = 4.2;
        let u = w.driver_control(0);
        assert!(u.steer < 0.0);
    }

    #[test]
    fn lane_keeping_settles_from_offset() {
        for speed in [1.0, 3.0, 5.0, 10.0] {
            let mut w = world(quiet_cfg());
            let mut p = params();
            p.desired_speed = speed;
            w.add_vehicle(VehicleState::new(0.0, 3.2, 0.0, speed), p, 1, ChaCha8Rng::seed_from_u64(5));
            for _ in 0..200 {
                w.step(None);
            }
            let s = w.vehicles[0].state;
            assert!((s.y - 3.7).abs() < 0.05, "v={speed}: y = {}", s.y);
            assert!(s.heading.abs() < 0.02, "v={speed}: heading = {}", s.heading);
        }
    }

    #[test]
    fn follower_keeps_distance_from_leader() {
        let mut w = world(quiet_cfg());
        let p = params();
        w.add_vehicle(VehicleState::new(8.0, 3.7, 0.0, 1.0), p, 1, ChaCha8Rng::seed_from_u64(6));
        w.add_vehicle(VehicleState::new(0.0, 3.7, 0.0, 3.0), p, 1, ChaCha8Rng::seed_from_u64(7));
        for _ in 0..200 {
            w.step(None);
            let gap = (w.vehicles[0].state.x - 2.0) - (w.vehicles[1].state.x + 2.0);
            assert!(gap > 0.0, "follower rammed the leader, gap = {gap}");
        }
    }

    #[test]
    fn steps_are_deterministic() {
        let build = || {
            let mut w = world(WorldConfig { despawn_x: 60.0, ..WorldConfig::default() });
            for k in 0..5 {
                w.add_vehicle(
                    VehicleState::new(6.0 * k as f64, 3.7, 0.0, 1.0),
                    params(),
                    1,
                    ChaCha8Rng::seed_from_u64(10 + k),
                );
            }
            w.set_ego([2.0, 0.0], BodyGeometry::default());
            w
        };
        let mut a = build();
        let mut b = build();
        for step in 0..300 {
            let ego = [2.0 + 0.1 * step as f64, 0.0];
            a.step(Some(ego));
            b.step(Some(ego));
        }
        for (va, vb) in a.vehicles.iter().zip(&b.vehicles) {
            assert_eq!(va.state, vb.state);
            assert_eq!(va.generation, vb.generation);
        }
    }

    #[test]
    fn despawned_vehicles_respawn_upstream() {
        let cfg = WorldConfig {
            accel_noise: 0.0,
            lateral_osc_amp: 0.0,
            despawn_x: 20.0,
            ranges: ParamRanges::default(),
            ..WorldConfig::default()
        };
        let mut w = world(cfg);
        let p = params();
        w.add_vehicle(VehicleState::new(19.0, 3.7, 0.0, 5.0), p, 1, ChaCha8Rng::seed_from_u64(8));
        w.add_vehicle(VehicleState::new(0.0, 3.7, 0.0, 1.0), p, 1, ChaCha8Rng::seed_from_u64(9));
        for _ in 0..5 {
            w.step(None);
        }
        let front = &w.vehicles[0];
        assert_eq!(front.generation, 1, "vehicle should have wrapped once");
        assert!(front.state.x < 0.0, "respawned at x = {}", front.state.x);
        let rear_gap = (w.vehicles[1].state.x - 2.0) - (front.state.x + 2.0);
        assert!(rear_gap >= 1.0 - 1e-9, "respawn gap = {rear_gap}");
    }
}
