//! File configuration, validation, and run manifests.
//!
//! Configuration is a single TOML document with nested sections. Parameter
//! keys keep their conventional symbol names (`"λ_div"`, `"δ_min"`,
//! `"η_c"`, ...); every symbol also has an ASCII alias (`lambda_div`,
//! `delta_min`, `eta_c`, ...) for keyboards that prefer it. Missing keys
//! fall back to the built-in defaults, so an empty file is a complete,
//! runnable configuration. Unknown keys warn instead of erroring.
//!
//! Every run writes a manifest: the fully resolved configuration plus a
//! `[manifest]` metadata section. Feeding a manifest back through
//! `--config` reproduces the run bit-identically.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{ControllerConfig, SamplingScheme};
use crate::drivers::{MobilParams, ParamRanges, WorldConfig};
use crate::harness::{PredictorSpec, Regime, ScenarioSpec};
use crate::predictors::{ExternalConfig, PredictorKind};
use crate::road::LaneLayout;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerSection {
    /// Receding time horizon (s).
    #[serde(rename = "T")]
    pub horizon_seconds: f64,
    /// Control sequence sample size.
    #[serde(rename = "N_sim")]
    pub n_candidates: u32,
    /// Time step size (s).
    #[serde(rename = "Δt", alias = "dt")]
    pub dt: f64,
    #[serde(rename = "λ_div", alias = "lambda_div")]
    pub lane_weight_scale: f64,
    #[serde(rename = "λ_v", alias = "lambda_v")]
    pub speed_weight: f64,
    #[serde(rename = "λ_δ", alias = "lambda_delta")]
    pub steer_weight: f64,
    #[serde(rename = "λ_a", alias = "lambda_a")]
    pub accel_weight: f64,
    #[serde(rename = "λ_Δδ", alias = "lambda_steer_rate")]
    pub steer_rate_weight: f64,
    #[serde(rename = "λ_Δa", alias = "lambda_jerk")]
    pub jerk_weight: f64,
    #[serde(rename = "δ_min", alias = "delta_min")]
    pub steer_min: f64,
    #[serde(rename = "δ_max", alias = "delta_max")]
    pub steer_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub x_end: f64,
    pub v_ref: f64,
    /// Safety bound on the squared-clearance measure.
    pub epsilon: f64,
    /// Lane-keep steering-box shrink factor.
    pub alpha: f64,
    /// Lateral band for switching to the lane-keep maneuver (m);
    /// 0 derives half a lane width.
    pub mode_tol_y: f64,
    pub capture_tol_y: f64,
    pub capture_tol_psi: f64,
    /// Heading magnitude cap for rollout candidates (rad).
    pub heading_limit: f64,
    /// Road a not-yet-merged candidate state must keep in reserve (m).
    pub merge_reserve: f64,
    /// Road an unaligned in-lane state must keep in reserve (m).
    pub settle_reserve: f64,
    pub sampling: SamplingScheme,
    pub inject_zero_candidate: bool,
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self {
            horizon_seconds: 2.8,
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
            a_min: -4.0,
            a_max: 3.5,
            x_end: 50.0,
            v_ref: 10.0,
            epsilon: 0.5,
            alpha: 1.0,
            mode_tol_y: 0.0,
            capture_tol_y: 0.2,
            capture_tol_psi: 0.05,
            heading_limit: 0.35,
            merge_reserve: 9.0,
            settle_reserve: 3.0,
            sampling: SamplingScheme::PerStep,
            inject_zero_candidate: false,
        }
    }
}

const CONTROLLER_KEYS: &[&str] = &[
    "T", "N_sim", "Δt", "dt", "λ_div", "lambda_div", "λ_v", "lambda_v", "λ_δ", "lambda_delta",
    "λ_a", "lambda_a", "λ_Δδ", "lambda_steer_rate", "λ_Δa", "lambda_jerk", "δ_min", "delta_min",
    "δ_max", "delta_max", "a_min", "a_max", "x_end", "v_ref", "epsilon", "alpha", "mode_tol_y", "capture_tol_y",
    "capture_tol_psi", "heading_limit", "merge_reserve", "settle_reserve", "sampling", "inject_zero_candidate",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriversSection {
    /// Reference velocity range (m/s).
    #[serde(rename = "ṽ_ref", alias = "v_ref_range")]
    pub desired_speed: [f64; 2],
    /// Safe time headway range (s).
    #[serde(rename = "T̃", alias = "t_headway")]
    pub time_headway: [f64; 2],
    /// Maximum acceleration range (m/s^2).
    #[serde(rename = "ã_max", alias = "a_max_range")]
    pub max_accel: [f64; 2],
    /// Comfortable deceleration range (m/s^2).
    #[serde(rename = "b̃", alias = "b_comfort")]
    pub comfort_decel: [f64; 2],
    /// Acceleration exponent range.
    #[serde(rename = "δ̃", alias = "accel_exponent")]
    pub accel_exponent: [f64; 2],
    /// Minimum distance to the front vehicle, range (m).
    #[serde(rename = "s̃0", alias = "s0")]
    pub min_gap: [f64; 2],
    /// Cooperativeness range within [0, 1].
    #[serde(rename = "η_c", alias = "eta_c")]
    pub cooperativeness: [f64; 2],
    /// Perception-range perturbation range (m).
    #[serde(rename = "η_p", alias = "eta_p")]
    pub perception_shift: [f64; 2],
    /// Half width of every vehicle (m).
    pub w: f64,
    /// Half length of every vehicle (m).
    pub h: f64,
    pub politeness: f64,
    pub accel_threshold: f64,
    pub safe_braking: f64,
    #[serde(alias = "L_B")]
    pub zone_b_length: f64,
    pub zone_b_lateral: f64,
    pub steer_gain_lateral: f64,
    pub steer_gain_heading: f64,
    pub steer_limit: f64,
    pub accel_noise: f64,
    pub lateral_osc_amp: f64,
    pub lateral_osc_period: f64,
    pub lane_changes: bool,
}

impl Default for DriversSection {
    fn default() -> Self {
        let r = ParamRanges::default();
        let w = WorldConfig::default();
        let m = MobilParams::default();
        Self {
            desired_speed: r.desired_speed,
            time_headway: r.time_headway,
            max_accel: r.max_accel,
            comfort_decel: r.comfort_decel,
            accel_exponent: r.accel_exponent,
            min_gap: r.min_gap,
            cooperativeness: r.cooperativeness,
            perception_shift: r.perception_shift,
            w: r.half_width,
            h: r.half_length,
            politeness: m.politeness,
            accel_threshold: m.accel_threshold,
            safe_braking: m.safe_braking,
            zone_b_length: w.zone_b_length,
            zone_b_lateral: w.zone_b_lateral,
            steer_gain_lateral: w.steer_gain_lateral,
            steer_gain_heading: w.steer_gain_heading,
            steer_limit: w.steer_limit,
            accel_noise: w.accel_noise,
            lateral_osc_amp: w.lateral_osc_amp,
            lateral_osc_period: w.lateral_osc_period,
            lane_changes: w.lane_changes,
        }
    }
}

const DRIVERS_KEYS: &[&str] = &[
    "ṽ_ref", "v_ref_range", "T̃", "t_headway", "ã_max", "a_max_range", "b̃", "b_comfort", "δ̃",
    "accel_exponent", "s̃0", "s0", "η_c", "eta_c", "η_p", "eta_p", "w", "h", "politeness",
    "accel_threshold", "safe_braking", "L_B", "zone_b_length", "zone_b_lateral", "steer_gain_lateral",
    "steer_gain_heading", "steer_limit", "accel_noise", "lateral_osc_amp", "lateral_osc_period",
    "lane_changes",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSection {
    pub regime: Regime,
    pub seed: u64,
    pub lane_count: usize,
    pub lane_width: f64,
    pub ego_lane: usize,
    pub target_lane: usize,
    pub ego_x_range: [f64; 2],
    pub ego_speed_range: [f64; 2],
    pub fill_range: [f64; 2],
    pub gap_range: [f64; 2],
    pub initial_speed_range: [f64; 2],
    pub despawn_x: f64,
    pub dead_end_offset: f64,
    pub time_limit: f64,
    pub noise: bool,
    pub merge_hold_steps: u32,
    /// Pace-vehicle speed holding the target lane dense (m/s); 0 disables.
    pub pace_speed: f64,
    /// Worker-pool width: 0 = one thread per core, 1 = sequential.
    pub workers: usize,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let s = ScenarioSpec::default();
        Self {
            regime: Regime::Mixed,
            seed: 0,
            lane_count: s.road.lane_count,
            lane_width: s.road.lane_width,
            ego_lane: s.ego_lane,
            target_lane: s.target_lane,
            ego_x_range: s.ego_x_range,
            ego_speed_range: s.ego_speed_range,
            fill_range: s.fill_range,
            gap_range: s.gap_range,
            initial_speed_range: s.initial_speed_range,
            despawn_x: s.despawn_x,
            dead_end_offset: s.dead_end_offset,
            time_limit: s.time_limit,
            noise: s.noise,
            merge_hold_steps: s.merge_hold_steps,
            pace_speed: s.pace_speed,
            workers: 0,
        }
    }
}

const SCENARIO_KEYS: &[&str] = &[
    "regime", "seed", "lane_count", "lane_width", "ego_lane", "target_lane", "ego_x_range",
    "ego_speed_range", "fill_range", "gap_range", "initial_speed_range", "despawn_x", "dead_end_offset",
    "time_limit", "noise", "merge_hold_steps", "pace_speed", "workers",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictorSection {
    pub kind: PredictorKind,
    #[serde(rename = "T_obs", alias = "t_obs")]
    pub t_obs: usize,
    #[serde(rename = "T_pred", alias = "t_pred")]
    pub t_pred: usize,
    /// Command line of the external adapter process.
    pub external_command: Vec<String>,
    /// Response deadline for the external adapter (ms).
    pub deadline_ms: u64,
    /// Additive position noise for exported training data (m).
    pub export_noise_amp: f64,
    /// Driver-only episodes to simulate for `export-training`.
    pub export_episodes: usize,
    /// Steps per driver-only episode.
    pub export_steps: usize,
}

impl Default for PredictorSection {
    fn default() -> Self {
        Self {
            kind: PredictorKind::GroundTruth,
            t_obs: 8,
            t_pred: 2,
            external_command: Vec::new(),
            deadline_ms: 50,
            export_noise_amp: 0.0,
            export_episodes: 5,
            export_steps: 100,
        }
    }
}

const PREDICTOR_KEYS: &[&str] = &[
    "kind", "T_obs", "t_obs", "T_pred", "t_pred", "external_command", "deadline_ms",
    "export_noise_amp", "export_episodes", "export_steps",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchSection {
    pub episodes: usize,
    pub regimes: Vec<Regime>,
    pub predictors: Vec<PredictorKind>,
}

impl Default for BatchSection {
    fn default() -> Self {
        Self {
            episodes: 100,
            regimes: vec![Regime::Cooperative, Regime::Mixed, Regime::Aggressive],
            predictors: vec![PredictorKind::ConstantVelocity, PredictorKind::GroundTruth],
        }
    }
}

const BATCH_KEYS: &[&str] = &["episodes", "regimes", "predictors"];

/// Metadata stamped into a run manifest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ManifestSection {
    pub created_unix: u64,
    pub version: String,
    pub seed: u64,
    pub predictor: String,
    pub regime: String,
    pub out_dir: String,
    pub workers: usize,
}

const MANIFEST_KEYS: &[&str] =
    &["created_unix", "version", "seed", "predictor", "regime", "out_dir", "workers"];

/// The on-disk configuration document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    pub controller: ControllerSection,
    pub drivers: DriversSection,
    pub scenario: ScenarioSection,
    pub predictor: PredictorSection,
    pub batch: BatchSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestSection>,
}

/// Fully resolved runtime configuration.
#[derive(Debug, Clone)]
pub struct Config {
    /// The resolved document (what a manifest persists).
    pub file: FileConfig,
    pub controller: ControllerConfig,
    pub scenario: ScenarioSpec,
    pub predictor: PredictorSpec,
    pub regime: Regime,
    pub seed: u64,
    pub workers: usize,
    pub batch: BatchSection,
    pub export_noise_amp: f64,
    pub export_episodes: usize,
    pub export_steps: usize,
}

/// Parse a configuration document, returning unknown-key warnings alongside.
pub fn parse_config(text: &str) -> Result<(FileConfig, Vec<String>), ConfigError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let mut warnings = Vec::new();
    let sections: &[(&str, &[&str])] = &[
        ("controller", CONTROLLER_KEYS),
        ("drivers", DRIVERS_KEYS),
        ("scenario", SCENARIO_KEYS),
        ("predictor", PREDICTOR_KEYS),
        ("batch", BATCH_KEYS),
        ("manifest", MANIFEST_KEYS),
    ];
    for (key, value) in &table {
        match sections.iter().find(|(name, _)| name == key) {
            None => warnings.push(format!("unknown section [{key}] ignored")),
            Some((name, allowed)) => {
                if let Some(section) = value.as_table() {
                    for k in section.keys() {
                        if !allowed.contains(&k.as_str()) {
                            warnings.push(format!("unknown key {name}.{k} ignored"));
                        }
                    }
                }
            }
        }
    }
    // Unknown keys must not fail deserialization: rebuild the document from
    // known keys only.
    let mut known = toml::Table::new();
    for (name, allowed) in sections {
        if let Some(toml::Value::Table(section)) = table.get(*name) {
            let filtered: toml::Table = section
                .iter()
                .filter(|(k, _)| allowed.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            known.insert((*name).to_string(), toml::Value::Table(filtered));
        }
    }
    let file: FileConfig =
        known.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    Ok((file, warnings))
}

/// Load a configuration file; a missing or empty file means defaults.
pub fn load_file(path: &Path) -> Result<(FileConfig, Vec<String>), ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Validate and resolve a document into runtime structures. Validation
/// reports every violation, not just the first.
pub fn resolve(file: &FileConfig) -> Result<Config, ConfigError> {
    let mut errors = Vec::new();
    let c = &file.controller;
    let d = &file.drivers;
    let s = &file.scenario;
    let p = &file.predictor;

    let mut check = |ok: bool, msg: String| {
        if !ok {
            errors.push(msg);
        }
    };

    check(c.horizon_seconds > 0.0, format!("controller.T must be positive, got {}", c.horizon_seconds));
    check(c.dt > 0.0, format!("controller.Δt must be positive, got {}", c.dt));
    check(c.n_candidates >= 1, "controller.N_sim must be at least 1".into());
    for (name, v) in [
        ("λ_div", c.lane_weight_scale),
        ("λ_v", c.speed_weight),
        ("λ_δ", c.steer_weight),
        ("λ_a", c.accel_weight),
        ("λ_Δδ", c.steer_rate_weight),
        ("λ_Δa", c.jerk_weight),
    ] {
        check(v >= 0.0, format!("controller.{name} must be non-negative, got {v}"));
    }
    check(
        c.steer_min < c.steer_max,
        format!("controller.δ_min ({}) must be below controller.δ_max ({})", c.steer_min, c.steer_max),
    );
    check(
        c.a_min < c.a_max,
        format!("controller.a_min ({}) must be below controller.a_max ({})", c.a_min, c.a_max),
    );
    check(c.epsilon >= 0.0, format!("controller.epsilon must be non-negative, got {}", c.epsilon));
    check(
        (0.0..=1.0).contains(&c.alpha),
        format!("controller.alpha must lie in [0, 1], got {}", c.alpha),
    );
    check(c.capture_tol_y > 0.0, "controller.capture_tol_y must be positive".into());
    check(c.mode_tol_y >= 0.0, "controller.mode_tol_y must be non-negative".into());
    check(c.capture_tol_psi > 0.0, "controller.capture_tol_psi must be positive".into());
    check(c.heading_limit > 0.0, "controller.heading_limit must be positive".into());
    check(c.merge_reserve >= 0.0, "controller.merge_reserve must be non-negative".into());
    check(c.settle_reserve >= 0.0, "controller.settle_reserve must be non-negative".into());

    let ranges = ParamRanges {
        desired_speed: d.desired_speed,
        time_headway: d.time_headway,
        max_accel: d.max_accel,
        comfort_decel: d.comfort_decel,
        accel_exponent: d.accel_exponent,
        min_gap: d.min_gap,
        cooperativeness: d.cooperativeness,
        perception_shift: d.perception_shift,
        half_width: d.w,
        half_length: d.h,
    };
    if let Err(e) = ranges.validate() {
        check(false, format!("drivers: {e}"));
    }
    check(d.safe_braking > 0.0, "drivers.safe_braking must be positive".into());
    check(d.politeness >= 0.0, "drivers.politeness must be non-negative".into());
    check(d.zone_b_length > 0.0, "drivers.zone_b_length (L_B) must be positive".into());
    check(d.zone_b_lateral >= 0.0, "drivers.zone_b_lateral must be non-negative".into());
    check(d.lateral_osc_period > 0.0, "drivers.lateral_osc_period must be positive".into());
    check(d.steer_limit > 0.0, "drivers.steer_limit must be positive".into());

    check(s.lane_count >= 2, format!("scenario.lane_count must be at least 2, got {}", s.lane_count));
    check(
        s.lane_width > 2.0 * d.w,
        format!("scenario.lane_width ({}) must exceed the vehicle width (2*w = {})", s.lane_width, 2.0 * d.w),
    );
    check(s.ego_lane < s.lane_count, format!("scenario.ego_lane {} out of range", s.ego_lane));
    check(s.target_lane < s.lane_count, format!("scenario.target_lane {} out of range", s.target_lane));
    check(s.time_limit > 0.0, "scenario.time_limit must be positive".into());
    for (name, [lo, hi]) in [
        ("ego_x_range", s.ego_x_range),
        ("ego_speed_range", s.ego_speed_range),
        ("gap_range", s.gap_range),
        ("initial_speed_range", s.initial_speed_range),
    ] {
        check(lo <= hi, format!("scenario.{name}: lo ({lo}) > hi ({hi})"));
    }
    check(s.merge_hold_steps >= 1, "scenario.merge_hold_steps must be at least 1".into());
    check(s.pace_speed >= 0.0, "scenario.pace_speed must be non-negative".into());

    check(p.t_obs >= 2, format!("predictor.T_obs must be at least 2, got {}", p.t_obs));
    check(p.t_pred >= 1, format!("predictor.T_pred must be at least 1, got {}", p.t_pred));
    check(p.deadline_ms > 0, "predictor.deadline_ms must be positive".into());
    if p.kind == PredictorKind::External {
        check(!p.external_command.is_empty(), "predictor.kind = external needs predictor.external_command".into());
    }
    check(p.export_noise_amp >= 0.0, "predictor.export_noise_amp must be non-negative".into());

    check(file.batch.episodes >= 1, "batch.episodes must be at least 1".into());
    check(!file.batch.regimes.is_empty(), "batch.regimes must not be empty".into());
    check(!file.batch.predictors.is_empty(), "batch.predictors must not be empty".into());

    let horizon_steps = (c.horizon_seconds / c.dt).round().max(0.0) as usize;
    check(
        horizon_steps >= 1,
        format!("controller horizon T/Δt = {}/{} rounds to zero steps", c.horizon_seconds, c.dt),
    );

    if !errors.is_empty() {
        return Err(ConfigError::Validation(errors));
    }

    let controller = ControllerConfig {
        horizon_steps,
        n_candidates: c.n_candidates as usize,
        dt: c.dt,
        lane_weight_scale: c.lane_weight_scale,
        speed_weight: c.speed_weight,
        steer_weight: c.steer_weight,
        accel_weight: c.accel_weight,
        steer_rate_weight: c.steer_rate_weight,
        jerk_weight: c.jerk_weight,
        steer_min: c.steer_min,
        steer_max: c.steer_max,
        accel_min: c.a_min,
        accel_max: c.a_max,
        x_end: c.x_end,
        speed_ref: c.v_ref,
        safety_margin: c.epsilon,
        keep_steer_shrink: c.alpha,
        mode_tol_y: if c.mode_tol_y > 0.0 { c.mode_tol_y } else { s.lane_width / 2.0 },
        capture_tol_y: c.capture_tol_y,
        capture_tol_heading: c.capture_tol_psi,
        heading_limit: c.heading_limit,
        merge_reserve: c.merge_reserve,
        settle_reserve: c.settle_reserve,
        lane_half_width: s.lane_width / 2.0,
        road_y_min: (s.ego_lane.min(s.target_lane) as f64 - 0.5) * s.lane_width + d.w,
        road_y_max: (s.ego_lane.max(s.target_lane) as f64 + 0.5) * s.lane_width - d.w,
        sampling: c.sampling,
        inject_zero_candidate: c.inject_zero_candidate,
    };

    let world = WorldConfig {
        accel_noise: d.accel_noise,
        lateral_osc_amp: d.lateral_osc_amp,
        lateral_osc_period: d.lateral_osc_period,
        zone_b_length: d.zone_b_length,
        zone_b_lateral: d.zone_b_lateral,
        steer_gain_lateral: d.steer_gain_lateral,
        steer_gain_heading: d.steer_gain_heading,
        steer_limit: d.steer_limit,
        mobil: MobilParams {
            politeness: d.politeness,
            accel_threshold: d.accel_threshold,
            safe_braking: d.safe_braking,
        },
        lane_changes: d.lane_changes,
        despawn_x: s.despawn_x,
        respawn_fallback_x: s.fill_range[0],
        ranges,
    };

    let scenario = ScenarioSpec {
        road: LaneLayout::new(s.lane_count, s.lane_width),
        x_end: c.x_end,
        ego_lane: s.ego_lane,
        target_lane: s.target_lane,
        ego_x_range: s.ego_x_range,
        ego_speed_range: s.ego_speed_range,
        fill_range: s.fill_range,
        gap_range: s.gap_range,
        initial_speed_range: s.initial_speed_range,
        despawn_x: s.despawn_x,
        dead_end_offset: s.dead_end_offset,
        time_limit: s.time_limit,
        noise: s.noise,
        merge_hold_steps: s.merge_hold_steps,
        pace_speed: s.pace_speed,
        world,
    };

    let predictor = PredictorSpec {
        kind: p.kind,
        t_obs: p.t_obs,
        t_pred: p.t_pred,
        external: (!p.external_command.is_empty())
            .then(|| ExternalConfig::new(p.external_command.clone(), p.t_pred, p.deadline_ms)),
    };

    Ok(Config {
        file: file.clone(),
        controller,
        scenario,
        predictor,
        regime: s.regime,
        seed: s.seed,
        workers: s.workers,
        batch: file.batch.clone(),
        export_noise_amp: p.export_noise_amp,
        export_episodes: p.export_episodes,
        export_steps: p.export_steps,
    })
}

/// Load and resolve in one step.
pub fn load_config(path: &Path) -> Result<(Config, Vec<String>), ConfigError> {
    let (file, warnings) = load_file(path)?;
    Ok((resolve(&file)?, warnings))
}

/// Persist the resolved configuration plus run metadata as `manifest.toml`
/// in `out_dir`. The file is itself a valid `--config` input.
pub fn write_manifest(
    file: &FileConfig,
    meta: ManifestSection,
    out_dir: &Path,
) -> Result<PathBuf, ConfigError> {
    std::fs::create_dir_all(out_dir)?;
    let mut stamped = file.clone();
    stamped.manifest = Some(ManifestSection {
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        version: env!("CARGO_PKG_VERSION").to_string(),
        ..meta
    });
    let text = toml::to_string_pretty(&stamped)
        .map_err(|e| ConfigError::Parse(format!("manifest encode: {e}")))?;
    let path = out_dir.join("manifest.toml");
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_resolves_to_defaults() {
        let (file, warnings) = parse_config("").unwrap();
        assert!(warnings.is_empty());
        let cfg = resolve(&file).unwrap();
        assert_eq!(cfg.controller.n_candidates, 32);
        assert_eq!(cfg.controller.dt, 0.4);
        assert_eq!(cfg.controller.x_end, 50.0);
        assert_eq!(cfg.controller.horizon_steps, 7);
        assert_eq!(cfg.controller.speed_ref, 10.0);
        assert_eq!(cfg.scenario.time_limit, 40.0);
        assert_eq!(cfg.predictor.t_obs, 8);
        assert_eq!(cfg.predictor.t_pred, 2);
        assert_eq!(cfg.scenario.world.ranges.desired_speed, [2.0, 5.0]);
    }

    #[test]
    fn symbol_keys_and_aliases_both_parse() {
        let verbatim = r#"
[controller]
"λ_div" = 9000.0
"δ_min" = -0.2
"Δt" = 0.2

[drivers]
"η_c" = [0.3, 0.7]
"ṽ_ref" = [3.0, 4.0]
"#;
        let (file, warnings) = parse_config(verbatim).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(file.controller.lane_weight_scale, 9000.0);
        assert_eq!(file.controller.steer_min, -0.2);
        assert_eq!(file.controller.dt, 0.2);
        assert_eq!(file.drivers.cooperativeness, [0.3, 0.7]);
        assert_eq!(file.drivers.desired_speed, [3.0, 4.0]);

        let ascii = r#"
[controller]
lambda_div = 9000.0
delta_min = -0.2
dt = 0.2

[drivers]
eta_c = [0.3, 0.7]
v_ref_range = [3.0, 4.0]
"#;
        let (file2, warnings) = parse_config(ascii).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(file2.controller, file.controller);
        assert_eq!(file2.drivers, file.drivers);
    }

    #[test]
    fn inverted_steering_bounds_name_both_keys() {
        let (file, _) = parse_config("[controller]\n\"δ_min\" = 0.5\n\"δ_max\" = -0.5\n").unwrap();
        match resolve(&file) {
            Err(ConfigError::Validation(errors)) => {
                let joined = errors.join("\n");
                assert!(joined.contains("δ_min") && joined.contains("δ_max"), "{joined}");
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn validation_collects_every_violation() {
        let bad = r#"
[controller]
"Δt" = -1.0
"N_sim" = 0
epsilon = -2.0

[scenario]
time_limit = 0.0
"#;
        let (file, _) = parse_config(bad).unwrap();
        match resolve(&file) {
            Err(ConfigError::Validation(errors)) => {
                assert!(errors.len() >= 4, "expected all violations listed, got {errors:?}");
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_warn_but_do_not_fail() {
        let (file, warnings) =
            parse_config("[controller]\nfuture_flag = true\n\n[surprise]\nx = 1\n").unwrap();
        assert_eq!(warnings.len(), 2, "{warnings:?}");
        assert!(warnings[0].contains("future_flag"));
        assert!(warnings[1].contains("surprise"));
        assert!(resolve(&file).is_ok());
    }

    #[test]
    fn manifest_round_trips_bit_identically() {
        let (mut file, _) = parse_config("[scenario]\nseed = 42\nregime = \"agg\"\n").unwrap();
        file.predictor.kind = PredictorKind::ConstantVelocity;
        let dir = tempfile::tempdir().unwrap();
        let meta = ManifestSection {
            seed: 42,
            predictor: "cv".into(),
            regime: "agg".into(),
            out_dir: dir.path().display().to_string(),
            workers: 2,
            ..ManifestSection::default()
        };
        let path = write_manifest(&file, meta, dir.path()).unwrap();

        let (loaded, warnings) = load_file(&path).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        let manifest = loaded.manifest.clone().expect("manifest section present");
        assert_eq!(manifest.seed, 42);
        assert_eq!(manifest.predictor, "cv");
        assert_eq!(manifest.regime, "agg");

        // Identical resolved configuration (manifest metadata aside).
        let mut stripped = loaded.clone();
        stripped.manifest = None;
        assert_eq!(stripped, file);
        assert_eq!(resolve(&loaded).unwrap().seed, resolve(&file).unwrap().seed);
    }

    #[test]
    fn regime_and_predictor_tokens_parse() {
        let (file, _) =
            parse_config("[scenario]\nregime = \"coop\"\n\n[predictor]\nkind = \"cv\"\n").unwrap();
        assert_eq!(file.scenario.regime, Regime::Cooperative);
        assert_eq!(file.predictor.kind, PredictorKind::ConstantVelocity);
    }
}
