use lanemerge::controller::ControllerConfig;
use lanemerge::harness::{build_scenario, run_episode, PredictorSpec, Regime, ScenarioSpec};
use lanemerge::parallel::ExecContext;
use lanemerge::predictors::PredictorKind;

fn main() {
    let cfg = ControllerConfig::default();
    let sp = ScenarioSpec::default();
    let pred = PredictorSpec::new(PredictorKind::GroundTruth, 8, 2);
    for regime in [Regime::Cooperative, Regime::Aggressive] {
        let scenario = build_scenario(&sp, regime, 1000, cfg.dt, cfg.safety_margin).unwrap();
        let etas: Vec<f64> = scenario.world.vehicles.iter().take(4).map(|v| v.params.cooperativeness).collect();
        let r = run_episode(&scenario, &pred, &cfg, &ExecContext::sequential(), true).unwrap();
        let mid = &r.trajectory[r.trajectory.len() / 2].vehicles[0];
        println!(
            "{:?}: etas={etas:?} success={} mid-ego=({:.4},{:.4}) mindist={:.6}",
            regime, r.success, mid.state.x, mid.state.y, r.min_distance
        );
    }
}
