use lanemerge::controller::ControllerConfig;
use lanemerge::harness::{build_scenario, run_episode, PredictorSpec, Regime, ScenarioSpec};
use lanemerge::parallel::ExecContext;
use lanemerge::predictors::PredictorKind;

fn main() {
    let kind = if std::env::args().nth(1).as_deref() == Some("gt") {
        PredictorKind::GroundTruth
    } else {
        PredictorKind::ConstantVelocity
    };
    let mut cfg = ControllerConfig::default();
    cfg.safety_margin = 2.0;
    let mut sp = ScenarioSpec::default();
    sp.gap_range = [1.5, 3.5];
    sp.pace_speed = 1.6;
    for seed in 1000..1030u64 {
        let scenario = build_scenario(&sp, Regime::Aggressive, seed, 0.4, 2.0).unwrap();
        let r = run_episode(&scenario, &PredictorSpec::new(kind, 8, 2), &cfg, &ExecContext::sequential(), true).unwrap();
        if !r.collision {
            continue;
        }
        println!("=== seed {seed} collided at t={:.1}", r.duration);
        let n = r.steps.len();
        for s in r.steps.iter().skip(n.saturating_sub(6)) {
            println!(
                "t={:5.1} x={:6.2} y={:6.3} psi={:7.4} v={:6.3} a={:6.2} d={:6.3} {:?} feas={:2} gap={:.3}",
                s.t, s.ego.x, s.ego.y, s.ego.heading, s.ego.speed,
                s.input.accel, s.input.steer, s.mode, s.feasible_candidates, s.min_gap
            );
        }
        for snap in r.trajectory.iter().rev().take(3).collect::<Vec<_>>().into_iter().rev() {
            let ego = &snap.vehicles[0];
            print!("t={:5.1} ego=({:.2},{:.2},psi {:.3},v {:.2}) |", snap.t, ego.state.x, ego.state.y, ego.state.heading, ego.state.speed);
            for v in &snap.vehicles[1..] {
                if (v.state.x - ego.state.x).abs() < 7.0 && (v.state.y - ego.state.y).abs() < 4.0 {
                    print!(" {}=({:.2},{:.2},v {:.2})", v.id, v.state.x, v.state.y, v.state.speed);
                }
            }
            println!();
        }
        break;
    }
}
