use lanemerge::controller::ControllerConfig;
use lanemerge::drivers::{classify_zone, YieldZone};
use lanemerge::harness::{build_scenario, run_episode, PredictorSpec, Regime, ScenarioSpec};
use lanemerge::parallel::ExecContext;
use lanemerge::predictors::PredictorKind;

fn main() {
    let cfg = ControllerConfig::default();
    let sp = ScenarioSpec::default();
    let scenario = build_scenario(&sp, Regime::Cooperative, 1000, 0.4, 0.1).unwrap();
    let params: Vec<_> = scenario.world.vehicles.iter().map(|v| (v.params, v.lane, v.stationary)).collect();
    let r = run_episode(
        &scenario,
        &PredictorSpec::new(PredictorKind::GroundTruth, 8, 2),
        &cfg,
        &ExecContext::sequential(),
        true,
    )
    .unwrap();
    println!("success={} t2m={:?}", r.success, r.time_to_merge);
    let road = scenario.world.road;
    for snap in r.trajectory.iter().step_by(2) {
        let ego = &snap.vehicles[0];
        let mut forced = 0;
        let mut selective = 0;
        let mut nearest_gap = f64::INFINITY;
        for (i, v) in snap.vehicles.iter().skip(1).enumerate() {
            let (p, lane, stationary) = params[i];
            if stationary {
                continue;
            }
            let zone = classify_zone(
                v.state.x, &p, lane, &road,
                [ego.state.x, ego.state.y], &scenario.ego_geom, 6.0, 0.6,
            );
            match zone {
                YieldZone::Forced => forced += 1,
                YieldZone::Selective => selective += 1,
                YieldZone::None => {}
            }
            let bg = (ego.state.x - 2.0) - (v.state.x + 2.0);
            if bg.abs() < nearest_gap.abs() {
                nearest_gap = bg;
            }
        }
        println!(
            "t={:5.1} ego=({:6.2},{:6.3}) psi={:6.3} v={:5.2} forced={} selective={} nearest_dx_gap={:6.2}",
            snap.t, ego.state.x, ego.state.y, ego.state.heading, ego.state.speed, forced, selective, nearest_gap
        );
    }
}
