//! Perfect-foresight predictor backed by a cloned driver world.
//!
//! This is the prediction upper bound: it propagates the actual driver
//! models forward, so as long as the ego really follows the planned
//! positions handed in, the predicted reactions coincide exactly with what
//! the simulation will later do (the clone carries the drivers' RNG
//! streams, so even their noise matches).

use crate::drivers::DriverWorld;
use crate::Point;

use super::{ObservationWindow, PredictError, PredictionSheet, Predictor};

pub struct GroundTruthPredictor {
    world: DriverWorld,
    t_pred: usize,
}

impl GroundTruthPredictor {
    /// Takes a snapshot (clone) of the driver world at the current step.
    pub fn new(world: DriverWorld, t_pred: usize) -> Self {
        Self { world, t_pred }
    }
}

impl Predictor for GroundTruthPredictor {
    fn horizon(&self) -> usize {
        self.t_pred
    }

    /// Advances the internal world by `t_pred` steps. Consecutive calls on
    /// one instance continue the same rollout, which is exactly what
    /// [`super::predict_horizon`] needs; never reuse an instance for a
    /// different candidate.
    fn predict(
        &mut self,
        window: &ObservationWindow,
        ego_plan: Option<&[Point]>,
    ) -> Result<PredictionSheet, PredictError> {
        window.validate()?;
        if window.tracks.len() != self.world.vehicles.len() + 1 || window.ego_index != 0 {
            return Err(PredictError::ShapeMismatch(format!(
                "oracle world has {} drivers + ego, window has {} tracks (ego at {})",
                self.world.vehicles.len(),
                window.tracks.len(),
                window.ego_index
            )));
        }
        let plan = ego_plan.unwrap_or(&[]);
        // Without (or beyond) a plan, extrapolate the ego's last observed
        // displacement, like the constant-velocity model would.
        let last = window.latest(window.ego_index);
        let prev = window.tracks[window.ego_index][window.t_obs - 2];
        let cv_step = [last[0] - prev[0], last[1] - prev[1]];

        let n = window.tracks.len();
        let mut tracks = vec![Vec::with_capacity(self.t_pred); n];
        let mut ego_pos = last;
        for k in 0..self.t_pred {
            ego_pos = match plan.get(k) {
                Some(&p) => p,
                None if plan.is_empty() => {
                    [ego_pos[0] + cv_step[0], ego_pos[1] + cv_step[1]]
                }
                None => *plan.last().unwrap(),
            };
            self.world.step(Some(ego_pos));
            tracks[0].push(ego_pos);
            for (row, veh) in tracks[1..].iter_mut().zip(&self.world.vehicles) {
                row.push(veh.state.position());
            }
        }
        Ok(PredictionSheet { steps: self.t_pred, tracks })
    }
}
