use lanemerge::controller::ControllerConfig;
use lanemerge::harness::{build_scenario, run_episode, PredictorSpec, Regime, ScenarioSpec};
use lanemerge::parallel::ExecContext;
use lanemerge::predictors::PredictorKind;

fn main() {
    let cfg = ControllerConfig::default();
    let mut sp = ScenarioSpec::default();
    sp.gap_range = [1.5, 4.5];
    let mut fail_modes = std::collections::BTreeMap::new();
    for seed in 1000..1030u64 {
        let scenario = build_scenario(&sp, Regime::Cooperative, seed, 0.4, 0.1).unwrap();
        let r = run_episode(
            &scenario,
            &PredictorSpec::new(PredictorKind::GroundTruth, 8, 2),
            &cfg,
            &ExecContext::sequential(),
            true,
        )
        .unwrap();
        let last = r.steps.last().unwrap();
        let stuck_since = r
            .steps
            .iter()
            .rev()
            .take_while(|s| (s.ego.x - last.ego.x).abs() < 0.5 && s.ego.speed < 0.3)
            .count();
        let label = if r.success {
            "success"
        } else if r.collision {
            "collision"
        } else if stuck_since > 20 {
            if last.ego.y > 4.3 {
                "parked-above-lane"
            } else if last.ego.y > 1.85 {
                "parked-in-lane"
            } else if last.ego.x > 42.0 {
                "cornered-dead-end"
            } else {
                "parked-wedge"
            }
        } else {
            "moving-timeout"
        };
        *fail_modes.entry(label).or_insert(0) += 1;
        println!(
            "seed {seed}: {label:18} final x={:6.2} y={:6.3} psi={:6.3} v={:4.2} t2m={:?}",
            last.ego.x, last.ego.y, last.ego.heading, last.ego.speed, r.time_to_merge
        );
    }
    println!("\n{fail_modes:?}");
}
