//! Scenario construction, episode loop, and Monte Carlo batches.
//!
//! The benchmark scenario is a three-lane road whose rightmost lane dead-
//! ends at `x_end`. The ego starts in that lane at low speed; the middle
//! lane is packed with drivers at bumper gaps shorter than a vehicle length,
//! so merging requires other drivers to give way. An episode succeeds if the
//! ego reaches the target lane center (held for a couple of steps) before
//! the time limit; it always terminates at merge, collision, or timeout.

use std::fmt;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{self, ControllerConfig, EvalContext, ManeuverMode};
use crate::drivers::{sample_driver, DriverParams, DriverWorld, WorldConfig};
use crate::dynamics::{self, BodyGeometry, ControlInput, VehicleState};
use crate::geometry::{euclidean_min_gap, pair_distance};
use crate::parallel::ExecContext;
use crate::predictors::{
    AdapterPool, CvFactory, ExternalConfig, ExternalFactory, ObservationWindow, OracleFactory,
    PredictorKind,
};
use crate::rng::stream_rng;
use crate::road::LaneLayout;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("could not place initial traffic without overlap (seed {seed})")]
    PlacementFailed { seed: u64 },
    #[error("scenario references lane {lane} but the road has {lanes} lanes")]
    BadLane { lane: usize, lanes: usize },
    #[error("predictor kind `external` needs a configured adapter command")]
    MissingAdapterCommand,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Cooperativeness regime of the driver population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    #[serde(alias = "coop")]
    Cooperative,
    Mixed,
    #[serde(alias = "agg")]
    Aggressive,
}

impl Regime {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "coop" | "cooperative" => Some(Self::Cooperative),
            "mixed" => Some(Self::Mixed),
            "agg" | "aggressive" => Some(Self::Aggressive),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Cooperative => "coop",
            Self::Mixed => "mixed",
            Self::Aggressive => "agg",
        }
    }

    /// Cooperativeness pinned by the regime; `None` keeps the sampled range.
    pub fn fixed_cooperativeness(&self) -> Option<f64> {
        match self {
            Self::Cooperative => Some(1.0),
            Self::Aggressive => Some(0.0),
            Self::Mixed => None,
        }
    }
}

/// Everything needed to build scenarios, independent of seed and regime.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub road: LaneLayout,
    pub x_end: f64,
    pub ego_lane: usize,
    pub target_lane: usize,
    /// Ego start position range along the lane (m).
    pub ego_x_range: [f64; 2],
    /// Ego start speed range (m/s).
    pub ego_speed_range: [f64; 2],
    /// Traffic fills the target lane over this x interval; an empty
    /// interval (hi < lo) leaves the lane free.
    pub fill_range: [f64; 2],
    /// Initial bumper-to-bumper gap range between queued vehicles (m).
    pub gap_range: [f64; 2],
    /// Initial traffic speed cap range (m/s); each vehicle starts at the
    /// smaller of this draw and its own IDM equilibrium speed for its gap.
    pub initial_speed_range: [f64; 2],
    /// Traffic beyond this x wraps around and respawns upstream.
    pub despawn_x: f64,
    /// Stopped vehicle center sits at `x_end + dead_end_offset`.
    pub dead_end_offset: f64,
    pub time_limit: f64,
    /// Master switch for driver acceleration noise and lateral oscillation.
    pub noise: bool,
    /// Consecutive captured steps required to call the merge complete.
    pub merge_hold_steps: u32,
    /// Speed of the pace vehicle holding the target lane dense (m/s);
    /// 0 disables it and lets the queue stretch out downstream.
    pub pace_speed: f64,
    /// Driver-population template; the regime rewrites its cooperativeness
    /// range at build time.
    pub world: WorldConfig,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            road: LaneLayout::default(),
            x_end: 50.0,
            ego_lane: 0,
            target_lane: 1,
            ego_x_range: [5.0, 15.0],
            ego_speed_range: [0.0, 3.0],
            fill_range: [-30.0, 65.0],
            gap_range: [1.0, 3.0],
            initial_speed_range: [2.0, 5.0],
            despawn_x: 65.0,
            dead_end_offset: 2.0,
            time_limit: 40.0,
            noise: true,
            merge_hold_steps: 2,
            pace_speed: 1.5,
            world: WorldConfig::default(),
        }
    }
}

/// One concrete, fully sampled initial condition.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub seed: u64,
    pub regime: Regime,
    pub ego: VehicleState,
    pub ego_geom: BodyGeometry,
    pub target_center_y: f64,
    pub time_limit: f64,
    pub merge_hold_steps: u32,
    pub world: DriverWorld,
}

/// Sample a scenario: ego pose, stopped vehicle at the dead end, and the
/// packed target lane with per-driver parameters. The same `(regime, seed)`
/// always produces the same scenario, no matter which predictor later runs
/// on it.
pub fn build_scenario(
    spec: &ScenarioSpec,
    regime: Regime,
    seed: u64,
    dt: f64,
    epsilon: f64,
) -> Result<Scenario, HarnessError> {
    for lane in [spec.ego_lane, spec.target_lane] {
        if lane >= spec.road.lane_count {
            return Err(HarnessError::BadLane { lane, lanes: spec.road.lane_count });
        }
    }
    let mut ranges = spec.world.ranges;
    if let Some(eta) = regime.fixed_cooperativeness() {
        ranges.cooperativeness = [eta, eta];
    }
    let mut world_cfg = WorldConfig { ranges, despawn_x: spec.despawn_x, ..spec.world.clone() };
    if !spec.noise {
        world_cfg.accel_noise = 0.0;
        world_cfg.lateral_osc_amp = 0.0;
    }

    let mut scen_rng = stream_rng(seed, "scenario", 0);
    let mut world = DriverWorld::new(spec.road, dt, world_cfg, stream_rng(seed, "spawn", 0));

    // Ego.
    let ego_geom = BodyGeometry {
        half_width: ranges.half_width,
        half_length: ranges.half_length,
        ..BodyGeometry::default()
    };
    let ego = VehicleState::new(
        draw(&mut scen_rng, spec.ego_x_range),
        spec.road.center(spec.ego_lane),
        0.0,
        draw(&mut scen_rng, spec.ego_speed_range),
    );

    // Stopped vehicle marking the dead end of the ego's lane.
    let dead_end = VehicleState::new(spec.x_end + spec.dead_end_offset, spec.road.center(spec.ego_lane), 0.0, 0.0);
    let nominal = DriverParams {
        desired_speed: 0.0,
        time_headway: ranges.time_headway[0],
        max_accel: ranges.max_accel[0],
        comfort_decel: ranges.comfort_decel[0],
        accel_exponent: ranges.accel_exponent[0],
        min_gap: ranges.min_gap[0],
        cooperativeness: 0.0,
        perception_shift: 0.0,
        geom: ego_geom,
    };
    world.add_stationary(dead_end, nominal, spec.ego_lane);

    // A slow pace vehicle ahead of the queue models the downstream
    // congestion that keeps the lane packed for the whole episode.
    let [fill_lo, fill_hi] = spec.fill_range;
    if spec.pace_speed > 0.0 && fill_hi >= fill_lo {
        let mut params = sample_driver(&world.cfg.ranges.clone(), &mut scen_rng);
        params.desired_speed = spec.pace_speed;
        let state = VehicleState::new(
            fill_hi + 8.0,
            spec.road.center(spec.target_lane),
            0.0,
            spec.pace_speed,
        );
        world.add_pace_vehicle(state, params, spec.target_lane, stream_rng(seed, "pace", 0));
    }

    // Pack the target lane front to back. Each vehicle starts at the
    // smaller of a drawn speed and the IDM equilibrium for its actual gap,
    // so the queue begins in a consistent rolling state.
    let mut x = fill_hi;
    let mut gap_ahead = f64::INFINITY;
    let mut slot = 0u64;
    while x >= fill_lo {
        let params = sample_driver(&world.cfg.ranges.clone(), &mut scen_rng);
        let cap = draw(&mut scen_rng, spec.initial_speed_range);
        let equilibrium = if gap_ahead.is_finite() {
            ((gap_ahead - params.min_gap) / params.time_headway).clamp(0.0, params.desired_speed)
        } else {
            params.desired_speed
        };
        let speed = cap.min(equilibrium);
        let state = VehicleState::new(x, spec.road.center(spec.target_lane), 0.0, speed);
        world.add_vehicle(state, params, spec.target_lane, stream_rng(seed, "driver", slot));
        slot += 1;
        let gap = draw(&mut scen_rng, spec.gap_range);
        gap_ahead = gap;
        x -= 2.0 * params.geom.half_length + gap;
    }

    // Initial placements must be mutually clear of the safety threshold.
    let mut all: Vec<(VehicleState, BodyGeometry)> = vec![(ego, ego_geom)];
    all.extend(world.vehicles.iter().map(|v| (v.state, v.params.geom)));
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            if pair_distance(&all[i].0, &all[i].1, &all[j].0, &all[j].1) <= epsilon {
                return Err(HarnessError::PlacementFailed { seed });
            }
        }
    }

    world.set_ego(ego.position(), ego_geom);
    Ok(Scenario {
        seed,
        regime,
        ego,
        ego_geom,
        target_center_y: spec.road.center(spec.target_lane),
        time_limit: spec.time_limit,
        merge_hold_steps: spec.merge_hold_steps,
        world,
    })
}

fn draw(rng: &mut impl Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Per-step record of one episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepLog {
    pub t: f64,
    pub ego: VehicleState,
    pub input: ControlInput,
    pub mode: ManeuverMode,
    /// Cost of the applied candidate; absent when the fallback fired.
    pub cost: Option<f64>,
    pub feasible_candidates: usize,
    /// Smallest gap to any other vehicle after the step (m).
    pub min_gap: f64,
    pub solver_latency_s: f64,
}

/// Positions of every vehicle at one time, ego first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrafficSnapshot {
    pub t: f64,
    pub vehicles: Vec<AgentSnapshot>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub id: String,
    pub state: VehicleState,
    pub half_width: f64,
    pub half_length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: bool,
    /// Time at which the merge capture began, when successful (s).
    pub time_to_merge: Option<f64>,
    /// Smallest observed gap between the ego and any other vehicle (m).
    pub min_distance: f64,
    pub collision: bool,
    /// Simulated time at termination (s).
    pub duration: f64,
    pub steps: Vec<StepLog>,
    pub trajectory: Vec<TrafficSnapshot>,
}

/// Which predictor an episode runs, resolved from configuration.
#[derive(Debug, Clone)]
pub struct PredictorSpec {
    pub kind: PredictorKind,
    pub t_obs: usize,
    pub t_pred: usize,
    pub external: Option<ExternalConfig>,
}

impl PredictorSpec {
    pub fn new(kind: PredictorKind, t_obs: usize, t_pred: usize) -> Self {
        Self { kind, t_obs, t_pred, external: None }
    }
}

fn agent_snapshot(id: String, state: VehicleState, geom: &BodyGeometry) -> AgentSnapshot {
    AgentSnapshot { id, state, half_width: geom.half_width, half_length: geom.half_length }
}

/// Run one episode to merge, collision, or timeout.
///
/// `record` keeps the per-step logs and full trajectory (needed for plot
/// export); batch runs turn it off to save memory.
pub fn run_episode(
    scenario: &Scenario,
    pred: &PredictorSpec,
    cfg: &ControllerConfig,
    exec: &ExecContext,
    record: bool,
) -> Result<EpisodeResult, HarnessError> {
    let mut world = scenario.world.clone();
    let mut ego = scenario.ego;
    let ego_geom = scenario.ego_geom;
    let dt = cfg.dt;
    let mut rng = stream_rng(scenario.seed, "controller", 0);

    let pool = match (&pred.kind, &pred.external) {
        (PredictorKind::External, Some(ext)) => Some(AdapterPool::new(ext.clone())),
        (PredictorKind::External, None) => return Err(HarnessError::MissingAdapterCommand),
        _ => None,
    };

    let mut positions = vec![ego.position()];
    positions.extend(world.vehicles.iter().map(|v| v.state.position()));
    let mut window = ObservationWindow::backfilled(pred.t_obs, &positions, 0);
    let mut generations: Vec<u32> = world.vehicles.iter().map(|v| v.generation).collect();

    let snapshot = |t: f64, ego: &VehicleState, world: &DriverWorld| -> TrafficSnapshot {
        let mut vehicles = vec![agent_snapshot("ego".into(), *ego, &ego_geom)];
        vehicles.extend(world.vehicles.iter().enumerate().map(|(i, v)| {
            let id = if v.stationary { "stop".into() } else { format!("v{i:02}") };
            agent_snapshot(id, v.state, &v.params.geom)
        }));
        TrafficSnapshot { t, vehicles }
    };

    let min_gap_now = |ego: &VehicleState, world: &DriverWorld| -> f64 {
        world
            .vehicles
            .iter()
            .map(|v| euclidean_min_gap(ego, &ego_geom, &v.state, &v.params.geom))
            .fold(f64::INFINITY, f64::min)
    };

    let captured = |ego: &VehicleState| -> bool {
        (ego.y - scenario.target_center_y).abs() < cfg.capture_tol_y
            && ego.heading.abs() < cfg.capture_tol_heading
    };

    let mut min_distance = min_gap_now(&ego, &world);
    let mut collision = min_distance <= 0.0;
    let mut steps: Vec<StepLog> = Vec::new();
    let mut trajectory = Vec::new();
    if record {
        trajectory.push(snapshot(0.0, &ego, &world));
    }

    let mut streak: u32 = 0;
    let mut streak_start: f64 = 0.0;
    if captured(&ego) {
        streak = 1;
    }
    let mut success = false;
    let mut time_to_merge = None;
    let mut t = 0.0;
    let max_steps = (scenario.time_limit / dt).ceil() as usize;

    for _ in 0..max_steps {
        if collision {
            break;
        }
        let outcome = {
            let ctx = EvalContext {
                ego,
                ego_geom,
                others: world.vehicles.iter().map(|v| (v.state, v.params.geom)).collect(),
                window: &window,
                cfg,
                target_center_y: scenario.target_center_y,
            };
            match pred.kind {
                PredictorKind::ConstantVelocity => {
                    controller::solve_step(&ctx, &CvFactory { t_pred: pred.t_pred }, &mut rng, exec)
                }
                PredictorKind::GroundTruth => controller::solve_step(
                    &ctx,
                    &OracleFactory { world: &world, t_pred: pred.t_pred },
                    &mut rng,
                    exec,
                ),
                PredictorKind::External => controller::solve_step(
                    &ctx,
                    &ExternalFactory { pool: pool.as_ref().expect("pool built above").clone() },
                    &mut rng,
                    exec,
                ),
            }
        };

        let ego_next = dynamics::step(&ego, &outcome.input, &ego_geom, dt);
        world.step(Some(ego_next.position()));
        ego = ego_next;
        t += dt;

        let step_gap = min_gap_now(&ego, &world);
        min_distance = min_distance.min(step_gap);
        if step_gap <= 0.0 {
            collision = true;
        }

        // Roll the observation window; respawned vehicles restart their
        // history at the new position.
        positions[0] = ego.position();
        for (i, v) in world.vehicles.iter().enumerate() {
            positions[i + 1] = v.state.position();
        }
        window.roll(&positions);
        for (i, v) in world.vehicles.iter().enumerate() {
            if v.generation != generations[i] {
                window.reset_track(i + 1, v.state.position());
                generations[i] = v.generation;
            }
        }

        if record {
            steps.push(StepLog {
                t: t - dt,
                ego,
                input: outcome.input,
                mode: outcome.mode,
                cost: outcome.chosen.map(|i| outcome.candidates[i].cost),
                feasible_candidates: outcome.feasible_count(),
                min_gap: step_gap,
                solver_latency_s: outcome.latency.as_secs_f64(),
            });
            trajectory.push(snapshot(t, &ego, &world));
        }

        if captured(&ego) {
            if streak == 0 {
                streak_start = t;
            }
            streak += 1;
            if streak >= scenario.merge_hold_steps.max(1) {
                success = true;
                time_to_merge = Some(streak_start);
                break;
            }
        } else {
            streak = 0;
        }
    }

    Ok(EpisodeResult {
        success: success && !collision,
        time_to_merge: if success && !collision { time_to_merge } else { None },
        min_distance,
        collision,
        duration: t,
        steps,
        trajectory,
    })
}

/// Aggregate of one (regime, predictor) cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub regime: Regime,
    pub predictor: PredictorKind,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate_pct: f64,
    /// Mean/std of time to merge over successful episodes (s).
    pub merge_time_mean: Option<f64>,
    pub merge_time_std: Option<f64>,
    /// Mean/std of the episode minimum distance (m), over all episodes.
    pub min_distance_mean: f64,
    pub min_distance_std: f64,
    pub collisions: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchSummary {
    pub episodes_per_cell: usize,
    pub base_seed: u64,
    pub cells: Vec<CellSummary>,
}

impl BatchSummary {
    pub fn cell(&self, regime: Regime, predictor: PredictorKind) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.regime == regime && c.predictor == predictor)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

/// Run a (regime x predictor) grid with paired seeds: episode `i` uses seed
/// `base_seed + i` in every cell, so predictor columns face identical
/// initial conditions. Episodes within a cell run in parallel.
pub fn run_batch(
    spec: &ScenarioSpec,
    cfg: &ControllerConfig,
    predictors: &[PredictorSpec],
    regimes: &[Regime],
    episodes: usize,
    base_seed: u64,
    exec: &ExecContext,
) -> Result<BatchSummary, HarnessError> {
    let mut cells = Vec::new();
    for &regime in regimes {
        for pred in predictors {
            let results: Vec<Result<EpisodeResult, HarnessError>> =
                exec.map((0..episodes).collect(), |i| {
                    let scenario = build_scenario(spec, regime, base_seed + i as u64, cfg.dt, cfg.safety_margin)?;
                    run_episode(&scenario, pred, cfg, &ExecContext::sequential(), false)
                });
            let mut ok = Vec::with_capacity(results.len());
            for r in results {
                ok.push(r?);
            }
            let successes = ok.iter().filter(|r| r.success).count();
            let merge_times: Vec<f64> = ok.iter().filter_map(|r| r.time_to_merge).collect();
            let dists: Vec<f64> = ok.iter().map(|r| r.min_distance).collect();
            let (mt_mean, mt_std) = mean_std(&merge_times);
            let (d_mean, d_std) = mean_std(&dists);
            cells.push(CellSummary {
                regime,
                predictor: pred.kind,
                episodes: ok.len(),
                successes,
                success_rate_pct: 100.0 * successes as f64 / ok.len().max(1) as f64,
                merge_time_mean: (!merge_times.is_empty()).then_some(mt_mean),
                merge_time_std: (!merge_times.is_empty()).then_some(mt_std),
                min_distance_mean: d_mean,
                min_distance_std: d_std,
                collisions: ok.iter().filter(|r| r.collision).count(),
            });
        }
    }
    Ok(BatchSummary { episodes_per_cell: episodes, base_seed, cells })
}

impl fmt::Display for BatchSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:<9} {:>9} {:>14} {:>16} {:>11}",
            "regime", "predictor", "success", "merge time [s]", "min distance [m]", "collisions"
        )?;
        for c in &self.cells {
            let merge = match (c.merge_time_mean, c.merge_time_std) {
                (Some(m), Some(s)) => format!("{m:.2} (±{s:.2})"),
                _ => "-".into(),
            };
            writeln!(
                f,
                "{:<8} {:<9} {:>8.0}% {:>14} {:>16} {:>11}",
                c.regime.label(),
                c.predictor.label(),
                c.success_rate_pct,
                merge,
                format!("{:.2} (±{:.2})", c.min_distance_mean, c.min_distance_std),
                c.collisions
            )?;
        }
        Ok(())
    }
}

/// Write the batch summary as CSV.
pub fn write_batch_csv(summary: &BatchSummary, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "regime",
        "predictor",
        "episodes",
        "successes",
        "success_rate_pct",
        "merge_time_mean_s",
        "merge_time_std_s",
        "min_distance_mean_m",
        "min_distance_std_m",
        "collisions",
    ])?;
    for c in &summary.cells {
        w.write_record([
            c.regime.label().to_string(),
            c.predictor.label().to_string(),
            c.episodes.to_string(),
            c.successes.to_string(),
            c.success_rate_pct.to_string(),
            c.merge_time_mean.map_or(String::new(), |v| v.to_string()),
            c.merge_time_std.map_or(String::new(), |v| v.to_string()),
            c.min_distance_mean.to_string(),
            c.min_distance_std.to_string(),
            c.collisions.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write the trajectory and control-profile CSVs for one recorded episode.
/// Returns the two paths (trajectory, controls).
pub fn emit_plot_data(result: &EpisodeResult, out_dir: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    std::fs::create_dir_all(out_dir)?;
    let traj_path = out_dir.join("trajectory.csv");
    let mut w = csv::Writer::from_path(&traj_path)?;
    w.write_record(["t", "vehicle", "x", "y", "psi", "v", "half_width", "half_length"])?;
    for snap in &result.trajectory {
        for a in &snap.vehicles {
            w.write_record([
                snap.t.to_string(),
                a.id.clone(),
                a.state.x.to_string(),
                a.state.y.to_string(),
                a.state.heading.to_string(),
                a.state.speed.to_string(),
                a.half_width.to_string(),
                a.half_length.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let ctrl_path = out_dir.join("controls.csv");
    let mut w = csv::Writer::from_path(&ctrl_path)?;
    w.write_record(["t", "a", "delta", "mode", "cost", "solver_latency_s"])?;
    for s in &result.steps {
        w.write_record([
            s.t.to_string(),
            s.input.accel.to_string(),
            s.input.steer.to_string(),
            format!("{:?}", s.mode),
            s.cost.map_or(String::new(), |c| c.to_string()),
            s.solver_latency_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok((traj_path, ctrl_path))
}

/// Write the per-step structured log (one JSON object per line).
pub fn emit_step_log(result: &EpisodeResult, path: &Path) -> Result<(), HarnessError> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    for s in &result.steps {
        let line = serde_json::to_string(s).expect("step logs always serialize");
        writeln!(f, "{line}")?;
    }
    Ok(())
}

/// Recompute the episode minimum distance from an emitted trajectory CSV.
/// Used to cross-check the in-run metric.
pub fn min_distance_from_trajectory_csv(path: &Path) -> Result<f64, HarnessError> {
    #[derive(Clone)]
    struct Row {
        t: f64,
        id: String,
        state: VehicleState,
        geom: BodyGeometry,
    }
    let mut rows: Vec<Row> = Vec::new();
    let mut reader = csv::Reader::from_path(path)?;
    for record in reader.records() {
        let r = record?;
        let get = |i: usize| -> f64 { r.get(i).unwrap_or("0").parse().unwrap_or(f64::NAN) };
        rows.push(Row {
            t: get(0),
            id: r.get(1).unwrap_or("").to_string(),
            state: VehicleState::new(get(2), get(3), get(4), get(5)),
            geom: BodyGeometry {
                half_width: get(6),
                half_length: get(7),
                ..BodyGeometry::default()
            },
        });
    }
    let mut min = f64::INFINITY;
    let mut i = 0;
    while i < rows.len() {
        let t = rows[i].t;
        let mut ego: Option<Row> = None;
        let mut others = Vec::new();
        while i < rows.len() && rows[i].t == t {
            if rows[i].id == "ego" {
                ego = Some(rows[i].clone());
            } else {
                others.push(rows[i].clone());
            }
            i += 1;
        }
        if let Some(e) = ego {
            for o in others {
                min = min.min(euclidean_min_gap(&e.state, &e.geom, &o.state, &o.geom));
            }
        }
    }
    Ok(min)
}

/// Simulate the driver model alone (no ego) and return the vehicle-major
/// position tracks, for training-data export.
pub fn driver_only_trajectories(
    spec: &ScenarioSpec,
    regime: Regime,
    seed: u64,
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<crate::Point>>, HarnessError> {
    let scenario = build_scenario(spec, regime, seed, dt, 0.0)?;
    let mut world = scenario.world;
    world.ego = None;
    let n = world.vehicles.len();
    let mut tracks: Vec<Vec<crate::Point>> = vec![Vec::with_capacity(steps + 1); n];
    for (i, v) in world.vehicles.iter().enumerate() {
        tracks[i].push(v.state.position());
    }
    for _ in 0..steps {
        world.step(None);
        for (i, v) in world.vehicles.iter().enumerate() {
            tracks[i].push(v.state.position());
        }
    }
    Ok(tracks)
}
