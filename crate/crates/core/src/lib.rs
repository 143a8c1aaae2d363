//! Dense-traffic lane-change simulation and control.
//!
//! The crate simulates a three-lane road segment where an ego vehicle has to
//! merge into a packed neighboring lane before a dead end. The ego is driven
//! by a sampling-based receding-horizon controller that scores randomly drawn
//! control sequences against predicted motions of the surrounding traffic;
//! the surrounding traffic is a heterogeneous population of IDM/MOBIL drivers
//! with a tunable willingness to yield.
//!
//! Modules:
//! - [`dynamics`]: kinematic bicycle model shared by every vehicle.
//! - [`geometry`]: three-circle vehicle footprint and clearance measures.
//! - [`drivers`]: simulated driver population (IDM, MOBIL, yield zones).
//! - [`predictors`]: motion-prediction interface and implementations.
//! - [`controller`]: rollout-based receding-horizon controller.
//! - [`harness`]: scenario construction, episode loop, Monte Carlo batches.
//! - [`config`]: file configuration, validation, and run manifests.

pub mod config;
pub mod controller;
pub mod drivers;
pub mod dynamics;
pub mod geometry;
pub mod harness;
pub mod parallel;
pub mod predictors;
pub mod rng;
pub mod road;

pub use config::{load_config, Config, ConfigError};
pub use controller::{ControllerConfig, ManeuverMode, RolloutCandidate, SolveOutcome};
pub use dynamics::{BodyGeometry, ControlInput, VehicleState};
pub use geometry::{euclidean_min_gap, pair_distance};
pub use harness::{BatchSummary, EpisodeResult, Regime, Scenario};
pub use parallel::ExecContext;
pub use predictors::{ObservationWindow, PredictionSheet, Predictor, PredictorKind};

/// A planar point `[x, y]` in road coordinates (meters).
pub type Point = [f64; 2];
