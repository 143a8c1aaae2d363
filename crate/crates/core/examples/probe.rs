use lanemerge::controller::ControllerConfig;
use lanemerge::harness::{run_batch, PredictorSpec, Regime, ScenarioSpec};
use lanemerge::parallel::ExecContext;
use lanemerge::predictors::PredictorKind;

fn main() {
    let eps: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let gap_lo: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1.5);
    let gap_hi: f64 = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(3.5);
    let pace: f64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(1.2);
    let osc: f64 = std::env::args().nth(5).and_then(|s| s.parse().ok()).unwrap_or(0.03);
    let episodes: usize = std::env::args().nth(6).and_then(|s| s.parse().ok()).unwrap_or(30);
    let mut cfg = ControllerConfig::default();
    cfg.safety_margin = eps;
    let mut sp = ScenarioSpec::default();
    sp.gap_range = [gap_lo, gap_hi];
    sp.pace_speed = pace;
    sp.world.lateral_osc_amp = osc;
    let preds = [
        PredictorSpec::new(PredictorKind::ConstantVelocity, 8, 2),
        PredictorSpec::new(PredictorKind::GroundTruth, 8, 2),
    ];
    let regimes = [Regime::Cooperative, Regime::Mixed, Regime::Aggressive];
    let summary = run_batch(&sp, &cfg, &preds, &regimes, episodes, 1000, &ExecContext::new(0)).unwrap();
    println!("eps={eps} gap=[{gap_lo},{gap_hi}] pace={pace} osc={osc}");
    println!("{summary}");
}
