//! Interactive motion prediction.
//!
//! A predictor maps an observation window (the last `t_obs` center positions
//! of every vehicle, ego first) to predicted positions of every vehicle over
//! the next `t_pred` steps. Interactive implementations condition on the ego
//! vehicle's candidate plan: the planned positions are appended to the ego's
//! observed row, so the prediction reflects how traffic would react to that
//! particular plan.
//!
//! Predictors natively cover a short horizon (`t_pred = 2` by default). The
//! controller needs predictions over its full receding horizon, so
//! [`predict_horizon`] applies a predictor recursively, rolling the window
//! forward with the predictor's own output (and the ego plan) until the
//! horizon is covered.

mod export;
mod external;
mod oracle;

pub use export::{
    export_training_batch, read_training_batch, TrainingExportConfig, TrainingTrack, TrainingWindow,
};
pub use external::{
    AdapterPool, ExternalConfig, ExternalFactory, ExternalPredictor, WireRequest, WireResponse,
};
pub use oracle::GroundTruthPredictor;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drivers::DriverWorld;
use crate::Point;

/// Default observation window length (steps).
pub const DEFAULT_T_OBS: usize = 8;
/// Default native prediction horizon (steps).
pub const DEFAULT_T_PRED: usize = 2;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("observation window not full: track {index} has {have} of {need} steps")]
    WindowNotFull { index: usize, have: usize, need: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("ego plan covers {have} steps, horizon needs {need}")]
    PlanLength { have: usize, need: usize },
    #[error("predictor deadline of {0:?} exceeded")]
    DeadlineExceeded(Duration),
    #[error("adapter protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Rolling history of vehicle center positions, oldest first, exactly
/// `t_obs` entries per vehicle once full. Row `ego_index` is the ego.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationWindow {
    pub t_obs: usize,
    pub tracks: Vec<Vec<Point>>,
    pub ego_index: usize,
}

impl ObservationWindow {
    /// Window back-filled with each vehicle's current position, for the
    /// warm-up phase before `t_obs` real steps exist.
    pub fn backfilled(t_obs: usize, positions: &[Point], ego_index: usize) -> Self {
        Self {
            t_obs,
            tracks: positions.iter().map(|&p| vec![p; t_obs]).collect(),
            ego_index,
        }
    }

    pub fn validate(&self) -> Result<(), PredictError> {
        for (index, track) in self.tracks.iter().enumerate() {
            if track.len() != self.t_obs {
                return Err(PredictError::WindowNotFull {
                    index,
                    have: track.len(),
                    need: self.t_obs,
                });
            }
        }
        if self.ego_index >= self.tracks.len() {
            return Err(PredictError::ShapeMismatch(format!(
                "ego index {} out of range for {} tracks",
                self.ego_index,
                self.tracks.len()
            )));
        }
        Ok(())
    }

    /// Push one new position per vehicle, dropping the oldest.
    pub fn roll(&mut self, next: &[Point]) {
        debug_assert_eq!(next.len(), self.tracks.len());
        for (track, &pos) in self.tracks.iter_mut().zip(next) {
            track.remove(0);
            track.push(pos);
        }
    }

    /// Reset one vehicle's history to a constant position (after respawn).
    pub fn reset_track(&mut self, index: usize, pos: Point) {
        self.tracks[index] = vec![pos; self.t_obs];
    }

    pub fn latest(&self, index: usize) -> Point {
        *self.tracks[index].last().expect("window tracks are never empty")
    }
}

/// Predicted center positions, one row per window vehicle (same order),
/// exactly `steps` entries per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSheet {
    pub steps: usize,
    pub tracks: Vec<Vec<Point>>,
}

impl PredictionSheet {
    pub fn validate(&self) -> Result<(), PredictError> {
        for (i, t) in self.tracks.iter().enumerate() {
            if t.len() != self.steps {
                return Err(PredictError::ShapeMismatch(format!(
                    "prediction row {i} has {} of {} steps",
                    t.len(),
                    self.steps
                )));
            }
        }
        Ok(())
    }
}

/// One motion predictor instance.
///
/// Instances are used by a single rollout candidate at a time and may be
/// stateful across consecutive `predict` calls for that candidate (the
/// ground-truth predictor advances its cloned world). Never share an
/// instance between candidates; take a fresh one from a
/// [`PredictorFactory`].
pub trait Predictor {
    /// Native prediction horizon per call.
    fn horizon(&self) -> usize;

    /// Predict all vehicles over the next [`Predictor::horizon`] steps.
    /// `ego_plan`, when given, holds the ego's next planned positions
    /// (at most `horizon()` of them).
    fn predict(
        &mut self,
        window: &ObservationWindow,
        ego_plan: Option<&[Point]>,
    ) -> Result<PredictionSheet, PredictError>;
}

/// Hands out per-candidate predictor instances; shared read-only across the
/// rollout worker pool.
pub trait PredictorFactory: Sync {
    fn instance(&self) -> Box<dyn Predictor + Send + '_>;
}

/// Which predictor implementation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PredictorKind {
    #[serde(rename = "cv", alias = "constant_velocity")]
    ConstantVelocity,
    #[serde(rename = "oracle", alias = "ground_truth")]
    GroundTruth,
    #[serde(rename = "external")]
    External,
}

impl PredictorKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cv" | "constant_velocity" => Some(Self::ConstantVelocity),
            "oracle" | "ground_truth" => Some(Self::GroundTruth),
            "external" => Some(Self::External),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::ConstantVelocity => "cv",
            Self::GroundTruth => "oracle",
            Self::External => "external",
        }
    }
}

/// Extrapolates each vehicle's last observed single-step displacement.
#[derive(Debug, Clone, Copy)]
pub struct ConstantVelocityPredictor {
    t_pred: usize,
}

impl ConstantVelocityPredictor {
    pub fn new(t_pred: usize) -> Self {
        Self { t_pred }
    }
}

impl Predictor for ConstantVelocityPredictor {
    fn horizon(&self) -> usize {
        self.t_pred
    }

    fn predict(
        &mut self,
        window: &ObservationWindow,
        ego_plan: Option<&[Point]>,
    ) -> Result<PredictionSheet, PredictError> {
        window.validate()?;
        let tracks = window
            .tracks
            .iter()
            .enumerate()
            .map(|(i, track)| {
                let last = track[track.len() - 1];
                if i == window.ego_index {
                    if let Some(plan) = ego_plan {
                        if !plan.is_empty() {
                            let mut row: Vec<Point> = plan.iter().copied().take(self.t_pred).collect();
                            while row.len() < self.t_pred {
                                row.push(*row.last().unwrap());
                            }
                            return row;
                        }
                    }
                }
                let prev = track[track.len() - 2];
                let step = [last[0] - prev[0], last[1] - prev[1]];
                (1..=self.t_pred)
                    .map(|k| [last[0] + k as f64 * step[0], last[1] + k as f64 * step[1]])
                    .collect()
            })
            .collect();
        Ok(PredictionSheet { steps: self.t_pred, tracks })
    }
}

/// Factory for [`ConstantVelocityPredictor`] instances.
pub struct CvFactory {
    pub t_pred: usize,
}

impl PredictorFactory for CvFactory {
    fn instance(&self) -> Box<dyn Predictor + Send + '_> {
        Box::new(ConstantVelocityPredictor::new(self.t_pred))
    }
}

/// Factory cloning the current driver world per candidate.
pub struct OracleFactory<'w> {
    pub world: &'w DriverWorld,
    pub t_pred: usize,
}

impl PredictorFactory for OracleFactory<'_> {
    fn instance(&self) -> Box<dyn Predictor + Send + '_> {
        Box::new(GroundTruthPredictor::new(self.world.clone(), self.t_pred))
    }
}

/// Cover `horizon` steps by applying a predictor recursively: each call
/// yields the predictor's native chunk, the window rolls forward on the
/// chunk's output (the ego row follows `ego_plan`), and the next call
/// continues from there. `ego_plan` must hold exactly `horizon` positions.
pub fn predict_horizon(
    predictor: &mut dyn Predictor,
    window: &ObservationWindow,
    ego_plan: &[Point],
    horizon: usize,
) -> Result<PredictionSheet, PredictError> {
    window.validate()?;
    if ego_plan.len() != horizon {
        return Err(PredictError::PlanLength { have: ego_plan.len(), need: horizon });
    }
    let n = window.tracks.len();
    let mut out = PredictionSheet { steps: horizon, tracks: vec![Vec::with_capacity(horizon); n] };
    let mut win = window.clone();
    let mut done = 0;
    while done < horizon {
        let chunk = (horizon - done).min(predictor.horizon().max(1));
        let plan_chunk = &ego_plan[done..done + chunk];
        let sheet = predictor.predict(&win, Some(plan_chunk))?;
        sheet.validate()?;
        if sheet.tracks.len() != n {
            return Err(PredictError::ShapeMismatch(format!(
                "predictor returned {} rows for {} vehicles",
                sheet.tracks.len(),
                n
            )));
        }
        let mut step_positions = vec![[0.0, 0.0]; n];
        for k in 0..chunk {
            for i in 0..n {
                let pos = if i == win.ego_index { plan_chunk[k] } else { sheet.tracks[i][k] };
                out.tracks[i].push(pos);
                step_positions[i] = pos;
            }
            win.roll(&step_positions);
        }
        done += chunk;
    }
    Ok(out)
}

/// Average and final displacement error between a prediction and the truth,
/// both shaped `(vehicles, steps)`.
pub fn ade_fde(
    predicted: &PredictionSheet,
    truth: &PredictionSheet,
) -> Result<(f64, f64), PredictError> {
    predicted.validate()?;
    truth.validate()?;
    if predicted.tracks.len() != truth.tracks.len() || predicted.steps != truth.steps {
        return Err(PredictError::ShapeMismatch(format!(
            "predicted ({} x {}) vs truth ({} x {})",
            predicted.tracks.len(),
            predicted.steps,
            truth.tracks.len(),
            truth.steps
        )));
    }
    if predicted.steps == 0 || predicted.tracks.is_empty() {
        return Err(PredictError::ShapeMismatch("empty sheets".into()));
    }
    let mut sum = 0.0;
    let mut final_sum = 0.0;
    for (p_row, t_row) in predicted.tracks.iter().zip(&truth.tracks) {
        for (k, (p, t)) in p_row.iter().zip(t_row).enumerate() {
            let err = ((p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2)).sqrt();
            sum += err;
            if k + 1 == predicted.steps {
                final_sum += err;
            }
        }
    }
    let count = (predicted.tracks.len() * predicted.steps) as f64;
    Ok((sum / count, final_sum / predicted.tracks.len() as f64))
}
