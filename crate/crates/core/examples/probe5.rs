use lanemerge::drivers::{DriverParams, DriverWorld, ParamRanges, WorldConfig};
use lanemerge::dynamics::{BodyGeometry, VehicleState};
use lanemerge::road::LaneLayout;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(eta: f64) -> DriverParams {
    DriverParams {
        desired_speed: 3.0,
        time_headway: 1.5,
        max_accel: 3.0,
        comfort_decel: 2.0,
        accel_exponent: 4.0,
        min_gap: 2.0,
        cooperativeness: eta,
        perception_shift: 0.0,
        geom: BodyGeometry::default(),
    }
}

fn main() {
    for eta in [0.0, 1.0] {
        let cfg = WorldConfig {
            accel_noise: 0.0,
            lateral_osc_amp: 0.0,
            zone_b_lateral: 0.6,
            ranges: ParamRanges::default(),
            ..WorldConfig::default()
        };
        let mut w = DriverWorld::new(LaneLayout::default(), 0.4, cfg, ChaCha8Rng::seed_from_u64(1));
        // queue: leader ahead at 12, driver at 0, both rolling 2 m/s
        w.add_vehicle(VehicleState::new(12.0, 3.7, 0.0, 2.0), params(eta), 1, ChaCha8Rng::seed_from_u64(2));
        w.add_vehicle(VehicleState::new(0.0, 3.7, 0.0, 2.0), params(eta), 1, ChaCha8Rng::seed_from_u64(3));
        // ego nosing at the boundary, 4 m ahead of the driver, in the strip
        w.set_ego([7.0, 0.9], BodyGeometry::default());
        for _ in 0..10 {
            let ego = w.ego.unwrap();
            w.step(Some([ego.pos[0] + 0.4, ego.pos[1]]));
        }
        println!(
            "eta={eta}: follower v={:.3} x={:.2} hold={:?}",
            w.vehicles[1].state.speed, w.vehicles[1].state.x, w.vehicles[1].yield_hold()
        );
    }
}
