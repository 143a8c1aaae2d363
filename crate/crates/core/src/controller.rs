//! Sampling-based receding-horizon lane-change controller.
//!
//! Each control step draws `n_candidates` random control sequences from a
//! maneuver-specific action box, rolls each candidate forward through the
//! vehicle dynamics against predicted traffic motion, discards candidates
//! that violate the safety or road-end constraints, and applies the first
//! input of the cheapest surviving sequence.
//!
//! The stage cost combines lateral divergence from the target lane center
//! (weighted by a term growing like `1 / (x_end - x)` so merging gets more
//! urgent toward the dead end), speed tracking, control effort, and control
//! rates.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, BodyGeometry, ControlInput, VehicleState};
use crate::geometry::pair_distance;
use crate::parallel::ExecContext;
use crate::predictors::{predict_horizon, ObservationWindow, PredictorFactory};
use crate::Point;

#[derive(Debug, Error, PartialEq)]
pub enum ControllerError {
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
}

/// How per-step inputs are drawn within a candidate sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    /// Independent uniform draw per step.
    PerStep,
    /// One uniform draw held constant over the horizon.
    Hold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Receding horizon length in steps.
    pub horizon_steps: usize,
    /// Number of candidate sequences per solve.
    pub n_candidates: usize,
    /// Step size (s).
    pub dt: f64,
    /// Scale of the divergence weight (multiplies `1 / (x_end - x)`).
    pub lane_weight_scale: f64,
    /// Weight on squared speed error.
    pub speed_weight: f64,
    /// Weight on squared steering angle.
    pub steer_weight: f64,
    /// Weight on squared acceleration.
    pub accel_weight: f64,
    /// Weight on squared steering rate.
    pub steer_rate_weight: f64,
    /// Weight on squared acceleration rate (jerk).
    pub jerk_weight: f64,
    pub steer_min: f64,
    pub steer_max: f64,
    pub accel_min: f64,
    pub accel_max: f64,
    /// Road end: the merge must complete before this x (m).
    pub x_end: f64,
    /// Desired speed (m/s).
    pub speed_ref: f64,
    /// Safety threshold on the squared-clearance measure.
    pub safety_margin: f64,
    /// Steering-box shrink factor in lane-keep mode, in [0, 1].
    pub keep_steer_shrink: f64,
    /// Lateral band around the target center within which the maneuver
    /// switches to lane keeping (m). Wide enough that the keep mode's
    /// two-sided steering can align the vehicle after the crossing.
    pub mode_tol_y: f64,
    /// Lateral capture tolerance around the target lane center (m).
    pub capture_tol_y: f64,
    /// Heading capture tolerance (rad).
    pub capture_tol_heading: f64,
    /// Drivable corridor for the maneuver: candidates whose body strays
    /// outside `[road_y_min, road_y_max]` are infeasible. Spans the origin
    /// and target lanes; leaving it is as off-limits as leaving the road.
    pub road_y_min: f64,
    pub road_y_max: f64,
    /// Maximum heading magnitude a candidate may reach (rad). Merging never
    /// needs steep headings, and the one-sided steering boxes cannot unwind
    /// them, so steep candidates are pruned as undrivable.
    pub heading_limit: f64,
    /// Road ahead a not-yet-merged state must keep in reserve (m). The
    /// road-end constraint demands the lane change be complete by `x_end`,
    /// so states still outside the target lane may only advance to
    /// `x_end - merge_reserve`, the room the maneuver itself needs.
    pub merge_reserve: f64,
    /// Road an in-lane but not yet aligned state must keep in reserve (m):
    /// heading can only unwind while moving, so the last stretch before the
    /// dead end is reserved for already-settled states.
    pub settle_reserve: f64,
    /// Half width of a lane (m), used to test target-lane membership.
    pub lane_half_width: f64,
    pub sampling: SamplingScheme,
    /// Deterministically replace candidate 0 with the all-zero sequence
    /// (used by tests that need the zero-cost fixed point in the set).
    pub inject_zero_candidate: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            horizon_steps: 7,
            n_candidates: 32,
            dt: 0.4,
            lane_weight_scale: 12_000.0,
            speed_weight: 1_000.0,
            steer_weight: 500.0,
            accel_weight: 500.0,
            steer_rate_weight: 100.0,
            jerk_weight: 100.0,
            steer_min: -0.3,
            steer_max: 0.3,
            accel_min: -4.0,
            accel_max: 3.5,
            x_end: 50.0,
            speed_ref: 10.0,
            safety_margin: 0.5,
            keep_steer_shrink: 1.0,
            mode_tol_y: 1.85,
            capture_tol_y: 0.2,
            capture_tol_heading: 0.05,
            road_y_min: -0.95,
            road_y_max: 4.65,
            heading_limit: 0.35,
            merge_reserve: 9.0,
            settle_reserve: 3.0,
            lane_half_width: 1.85,
            sampling: SamplingScheme::PerStep,
            inject_zero_candidate: false,
        }
    }
}

/// Maneuver being executed, which restricts the sampled action box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverMode {
    Keep,
    ChangeLeft,
    ChangeRight,
}

impl ManeuverMode {
    /// Steering bounds of the maneuver's action box. Left changes only
    /// steer left, right changes only right, lane keeping uses a shrunk
    /// symmetric box.
    pub fn steer_bounds(&self, cfg: &ControllerConfig) -> (f64, f64) {
        match self {
            ManeuverMode::Keep => {
                (cfg.keep_steer_shrink * cfg.steer_min, cfg.keep_steer_shrink * cfg.steer_max)
            }
            ManeuverMode::ChangeLeft => (0.0, cfg.steer_max),
            ManeuverMode::ChangeRight => (cfg.steer_min, 0.0),
        }
    }
}

/// Pick the maneuver for the current step: steer toward the target lane
/// center until captured laterally, then keep.
pub fn select_mode(ego: &VehicleState, target_center_y: f64, cfg: &ControllerConfig) -> ManeuverMode {
    let offset = target_center_y - ego.y;
    if offset > cfg.mode_tol_y {
        ManeuverMode::ChangeLeft
    } else if offset < -cfg.mode_tol_y {
        ManeuverMode::ChangeRight
    } else {
        ManeuverMode::Keep
    }
}

/// Dynamic divergence weight: the configured scale is the weight at the
/// start of the lane, growing like `1 / (x_end - x)` as the road end
/// approaches (distance floored at 0.1 m so the weight stays finite). This
/// keeps the lane term dominant over the speed term at traffic speeds,
/// which is what makes stopping to wait for a gap optimal.
pub fn lane_divergence_weight(x: f64, cfg: &ControllerConfig) -> f64 {
    cfg.lane_weight_scale * cfg.x_end / (cfg.x_end - x).abs().max(0.1)
}

/// Stage-cost breakdown of one state/control trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub lane: f64,
    pub speed: f64,
    pub steer: f64,
    pub accel: f64,
    pub steer_rate: f64,
    pub jerk: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.lane + self.speed + self.steer + self.accel + self.steer_rate + self.jerk
    }
}

/// Evaluate the cost terms over a trajectory of `T + 1` states and `T`
/// controls. States cover the current one plus the horizon; rate terms sum
/// over the `T - 1` consecutive control differences.
pub fn stage_costs(
    states: &[VehicleState],
    controls: &[ControlInput],
    cfg: &ControllerConfig,
    target_center_y: f64,
) -> Result<CostBreakdown, ControllerError> {
    if states.len() != controls.len() + 1 {
        return Err(ControllerError::LengthMismatch {
            what: "states (controls + 1)",
            expected: controls.len() + 1,
            got: states.len(),
        });
    }
    let mut cost = CostBreakdown::default();
    for s in states {
        cost.lane += lane_divergence_weight(s.x, cfg) * (s.y - target_center_y).abs();
        cost.speed += cfg.speed_weight * (s.speed - cfg.speed_ref).powi(2);
    }
    for u in controls {
        cost.steer += cfg.steer_weight * u.steer.powi(2);
        cost.accel += cfg.accel_weight * u.accel.powi(2);
    }
    for pair in controls.windows(2) {
        cost.steer_rate += cfg.steer_rate_weight * (pair[1].steer - pair[0].steer).powi(2);
        cost.jerk += cfg.jerk_weight * (pair[1].accel - pair[0].accel).powi(2);
    }
    Ok(cost)
}

/// Draw `n_candidates` control sequences from the maneuver's action box.
pub fn sample_candidates(
    mode: ManeuverMode,
    cfg: &ControllerConfig,
    rng: &mut impl Rng,
) -> Vec<Vec<ControlInput>> {
    let (steer_lo, steer_hi) = mode.steer_bounds(cfg);
    let mut draw = |lo: f64, hi: f64| if lo == hi { lo } else { rng.random_range(lo..=hi) };
    let mut candidates = Vec::with_capacity(cfg.n_candidates);
    for _ in 0..cfg.n_candidates {
        let seq = match cfg.sampling {
            SamplingScheme::PerStep => (0..cfg.horizon_steps)
                .map(|_| {
                    ControlInput::new(
                        draw(cfg.accel_min, cfg.accel_max),
                        draw(steer_lo, steer_hi),
                    )
                })
                .collect(),
            SamplingScheme::Hold => {
                let u = ControlInput::new(
                    draw(cfg.accel_min, cfg.accel_max),
                    draw(steer_lo, steer_hi),
                );
                vec![u; cfg.horizon_steps]
            }
        };
        candidates.push(seq);
    }
    if cfg.inject_zero_candidate {
        if let Some(first) = candidates.first_mut() {
            *first = vec![ControlInput::default(); cfg.horizon_steps];
        }
    }
    candidates
}

/// One evaluated control sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutCandidate {
    pub controls: Vec<ControlInput>,
    /// Ego states over the horizon, current state first (`T + 1` entries).
    pub states: Vec<VehicleState>,
    /// Cumulative cost; infinite iff infeasible.
    pub cost: f64,
    pub feasible: bool,
    /// First horizon step (1-based) at which a constraint failed.
    pub infeasible_at: Option<usize>,
}

/// Everything a candidate evaluation needs to know about the world.
pub struct EvalContext<'a> {
    pub ego: VehicleState,
    pub ego_geom: BodyGeometry,
    /// Current states and geometries of the other vehicles, in window row
    /// order (window row `i + 1` is `others[i]`).
    pub others: Vec<(VehicleState, BodyGeometry)>,
    pub window: &'a ObservationWindow,
    pub cfg: &'a ControllerConfig,
    pub target_center_y: f64,
}

/// Roll one candidate forward: predict traffic conditioned on the ego plan,
/// propagate the ego, check the clearance and road-end constraints at every
/// step, and accumulate the cost. Prediction failures (deadline overruns
/// included) mark the candidate infeasible rather than erroring out.
pub fn evaluate_candidate(
    controls: Vec<ControlInput>,
    ctx: &EvalContext,
    factory: &dyn PredictorFactory,
) -> RolloutCandidate {
    let cfg = ctx.cfg;
    let horizon = controls.len();

    let mut states = Vec::with_capacity(horizon + 1);
    states.push(ctx.ego);
    for u in &controls {
        let last = states.last().expect("states never empty");
        states.push(dynamics::step(last, u, &ctx.ego_geom, cfg.dt));
    }
    let ego_plan: Vec<Point> = states[1..].iter().map(VehicleState::position).collect();

    let infeasible = |controls: Vec<ControlInput>, states: Vec<VehicleState>, at: usize| {
        RolloutCandidate { controls, states, cost: f64::INFINITY, feasible: false, infeasible_at: Some(at) }
    };

    let mut predictor = factory.instance();
    let sheet = match predict_horizon(predictor.as_mut(), ctx.window, &ego_plan, horizon) {
        Ok(sheet) => sheet,
        Err(_) => return infeasible(controls, states, 1),
    };

    // Constraints are judged relative to the current state: a margin that
    // is already violated (after an emergency fallback, say) only rules a
    // candidate out if it worsens it beyond a small recovery slack; healthy
    // margins must be kept outright. The slack keeps recovery maneuvers
    // (which may transiently deepen a violation by millimeters while the
    // heading unwinds) inside the feasible set.
    let corridor_req = ((ctx.ego.y - cfg.road_y_min).min(cfg.road_y_max - ctx.ego.y) - 0.15)
        .min(0.0);
    let heading_req = ((cfg.heading_limit - ctx.ego.heading.abs()) - 0.05).min(0.0);
    let x_limit = |state: &VehicleState| -> f64 {
        let offset = (state.y - ctx.target_center_y).abs();
        if offset > cfg.lane_half_width {
            cfg.x_end - cfg.merge_reserve
        } else if offset > cfg.capture_tol_y || state.heading.abs() > cfg.capture_tol_heading {
            cfg.x_end - cfg.settle_reserve
        } else {
            cfg.x_end
        }
    };
    let x_end_req = (x_limit(&ctx.ego) - ctx.ego.x).min(0.0);
    let clearance_req: Vec<f64> = ctx
        .others
        .iter()
        .map(|(other, other_geom)| {
            pair_distance(&ctx.ego, &ctx.ego_geom, other, other_geom).min(cfg.safety_margin)
        })
        .collect();

    // Headings of predicted vehicles come from consecutive predicted
    // displacements; below 1 mm of motion the previous heading is reused.
    let mut headings: Vec<f64> = ctx.others.iter().map(|(s, _)| s.heading).collect();
    let mut prev_pos: Vec<Point> = ctx.others.iter().map(|(s, _)| s.position()).collect();
    for step in 1..=horizon {
        let ego_state = &states[step];
        let corridor_margin =
            (ego_state.y - cfg.road_y_min).min(cfg.road_y_max - ego_state.y);
        if x_limit(ego_state) - ego_state.x < x_end_req
            || corridor_margin < corridor_req
            || cfg.heading_limit - ego_state.heading.abs() < heading_req
        {
            return infeasible(controls, states, step);
        }
        for (i, (_, other_geom)) in ctx.others.iter().enumerate() {
            let pos = sheet.tracks[i + 1][step - 1];
            let dx = pos[0] - prev_pos[i][0];
            let dy = pos[1] - prev_pos[i][1];
            if dx * dx + dy * dy > 1.0e-6 {
                headings[i] = dy.atan2(dx);
            }
            prev_pos[i] = pos;
            let other = VehicleState::new(pos[0], pos[1], headings[i], 0.0);
            if pair_distance(ego_state, &ctx.ego_geom, &other, other_geom) < clearance_req[i] {
                return infeasible(controls, states, step);
            }
        }
    }

    let cost = stage_costs(&states, &controls, cfg, ctx.target_center_y)
        .expect("lengths are consistent by construction")
        .total();
    RolloutCandidate { controls, states, cost, feasible: true, infeasible_at: None }
}

/// Outcome of one control step.
#[derive(Debug)]
pub struct SolveOutcome {
    /// Input to apply now: first element of the winning sequence, or the
    /// straight-line full-brake fallback when nothing was feasible.
    pub input: ControlInput,
    pub mode: ManeuverMode,
    /// Index of the winning candidate, if any was feasible.
    pub chosen: Option<usize>,
    pub candidates: Vec<RolloutCandidate>,
    pub latency: Duration,
}

impl SolveOutcome {
    pub fn feasible_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.feasible).count()
    }
}

/// Run one full solve: select the maneuver, sample candidates, evaluate
/// them (in parallel when the context allows), and pick the cheapest
/// feasible one. Ties break toward the lowest candidate index; with no
/// feasible candidate the fallback is maximum straight-line braking.
pub fn solve_step(
    ctx: &EvalContext,
    factory: &dyn PredictorFactory,
    rng: &mut impl Rng,
    exec: &ExecContext,
) -> SolveOutcome {
    let start = Instant::now();
    let cfg = ctx.cfg;
    let mode = select_mode(&ctx.ego, ctx.target_center_y, cfg);
    let sequences = sample_candidates(mode, cfg, rng);
    let candidates = exec.map(sequences, |seq| evaluate_candidate(seq, ctx, factory));

    let mut chosen: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if !c.feasible {
            continue;
        }
        match chosen {
            Some(best) if candidates[best].cost <= c.cost => {}
            _ => chosen = Some(i),
        }
    }
    let input = match chosen {
        Some(i) => candidates[i].controls[0],
        None => ControlInput::new(cfg.accel_min, 0.0),
    };
    SolveOutcome { input, mode, chosen, candidates, latency: start.elapsed() }
}
