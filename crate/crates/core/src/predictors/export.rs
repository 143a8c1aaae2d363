//! Training-data export for learned predictors.
//!
//! Episodes simulated with only the driver model are cut into sliding
//! windows of `t_obs` observed plus `t_pred` target positions per vehicle
//! and written as CSV with columns
//! `window_id,vehicle_id,step_index,role,x,y` (role is `obs` or `pred`,
//! `step_index` counts within the role). Coordinates are written in the
//! shortest round-trip decimal form, so reading a file back reproduces the
//! exact floating-point values.

use std::path::Path;

use rand::Rng;

use crate::Point;

use super::PredictError;

#[derive(Debug, Clone, Copy)]
pub struct TrainingExportConfig {
    pub t_obs: usize,
    pub t_pred: usize,
    /// Uniform position noise amplitude (m); 0 writes raw positions.
    pub noise_amp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTrack {
    pub vehicle_id: usize,
    pub obs: Vec<Point>,
    pub pred: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingWindow {
    pub window_id: usize,
    pub vehicles: Vec<TrainingTrack>,
}

/// Cut an episode (vehicle-major position tracks of equal length) into
/// sliding windows and write them to `path`. Returns the window count:
/// `len - t_obs - t_pred + 1`, or zero for episodes too short to cut.
pub fn export_training_batch(
    trajectories: &[Vec<Point>],
    cfg: &TrainingExportConfig,
    rng: &mut impl Rng,
    path: &Path,
) -> Result<usize, PredictError> {
    let len = trajectories.first().map_or(0, Vec::len);
    for (i, track) in trajectories.iter().enumerate() {
        if track.len() != len {
            return Err(PredictError::ShapeMismatch(format!(
                "trajectory {i} has {} steps, expected {len}",
                track.len()
            )));
        }
    }
    let span = cfg.t_obs + cfg.t_pred;
    let windows = (len + 1).saturating_sub(span);

    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["window_id", "vehicle_id", "step_index", "role", "x", "y"])?;
    let mut jitter = |v: f64| -> f64 {
        if cfg.noise_amp > 0.0 {
            v + rng.random_range(-cfg.noise_amp..=cfg.noise_amp)
        } else {
            v
        }
    };
    for w in 0..windows {
        for (vehicle_id, track) in trajectories.iter().enumerate() {
            for (role, offset, count) in [("obs", 0, cfg.t_obs), ("pred", cfg.t_obs, cfg.t_pred)] {
                for k in 0..count {
                    let [x, y] = track[w + offset + k];
                    writer.write_record([
                        w.to_string(),
                        vehicle_id.to_string(),
                        k.to_string(),
                        role.to_string(),
                        jitter(x).to_string(),
                        jitter(y).to_string(),
                    ])?;
                }
            }
        }
    }
    writer.flush()?;
    Ok(windows)
}

/// Read a training batch back into windows, preserving the written order.
pub fn read_training_batch(path: &Path) -> Result<Vec<TrainingWindow>, PredictError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut windows: Vec<TrainingWindow> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| -> Result<&str, PredictError> {
            record
                .get(i)
                .ok_or_else(|| PredictError::ShapeMismatch(format!("row missing column {i}")))
        };
        let window_id: usize = field(0)?
            .parse()
            .map_err(|e| PredictError::ShapeMismatch(format!("window_id: {e}")))?;
        let vehicle_id: usize = field(1)?
            .parse()
            .map_err(|e| PredictError::ShapeMismatch(format!("vehicle_id: {e}")))?;
        let role = field(3)?.to_string();
        let x: f64 = field(4)?
            .parse()
            .map_err(|e| PredictError::ShapeMismatch(format!("x: {e}")))?;
        let y: f64 = field(5)?
            .parse()
            .map_err(|e| PredictError::ShapeMismatch(format!("y: {e}")))?;

        while windows.len() <= window_id {
            let id = windows.len();
            windows.push(TrainingWindow { window_id: id, vehicles: Vec::new() });
        }
        let window = &mut windows[window_id];
        if window.vehicles.iter().all(|t| t.vehicle_id != vehicle_id) {
            window.vehicles.push(TrainingTrack { vehicle_id, obs: Vec::new(), pred: Vec::new() });
        }
        let track = window
            .vehicles
            .iter_mut()
            .find(|t| t.vehicle_id == vehicle_id)
            .expect("track just ensured");
        match role.as_str() {
            "obs" => track.obs.push([x, y]),
            "pred" => track.pred.push([x, y]),
            other => {
                return Err(PredictError::ShapeMismatch(format!("unknown role {other:?}")));
            }
        }
    }
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn episode(vehicles: usize, len: usize) -> Vec<Vec<Point>> {
        (0..vehicles)
            .map(|i| {
                (0..len)
                    .map(|k| [k as f64 * (1.0 + i as f64 * 0.1), 3.7 * i as f64 + 0.01 * k as f64])
                    .collect()
            })
            .collect()
    }

    #[test]
    fn window_count_arithmetic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.csv");
        let cfg = TrainingExportConfig { t_obs: 8, t_pred: 2, noise_amp: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);

        // Exactly one window at minimum length.
        let n = export_training_batch(&episode(3, 10), &cfg, &mut rng, &path).unwrap();
        assert_eq!(n, 1);
        let windows = read_training_batch(&path).unwrap();
        assert_eq!(windows.len(), 1);
        assert_eq!(windows[0].vehicles.len(), 3);

        // General length.
        let n = export_training_batch(&episode(2, 25), &cfg, &mut rng, &path).unwrap();
        assert_eq!(n, 25 - 8 - 2 + 1);

        // Too short: no windows.
        let n = export_training_batch(&episode(2, 9), &cfg, &mut rng, &path).unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn noiseless_export_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.csv");
        let cfg = TrainingExportConfig { t_obs: 4, t_pred: 2, noise_amp: 0.0 };
        let trajectories = episode(2, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        export_training_batch(&trajectories, &cfg, &mut rng, &path).unwrap();

        let windows = read_training_batch(&path).unwrap();
        assert_eq!(windows.len(), 4);
        for (w, window) in windows.iter().enumerate() {
            for (v, track) in window.vehicles.iter().enumerate() {
                assert_eq!(track.obs.len(), 4);
                assert_eq!(track.pred.len(), 2);
                for (k, p) in track.obs.iter().chain(&track.pred).enumerate() {
                    // Bit-exact: Display/parse of f64 round-trips.
                    assert_eq!(*p, trajectories[v][w + k], "window {w} vehicle {v} step {k}");
                }
            }
        }
    }

    #[test]
    fn noisy_export_still_round_trips_what_was_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.csv");
        let cfg = TrainingExportConfig { t_obs: 4, t_pred: 2, noise_amp: 0.1 };
        let trajectories = episode(2, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        export_training_batch(&trajectories, &cfg, &mut rng, &path).unwrap();
        let first = read_training_batch(&path).unwrap();
        let second = read_training_batch(&path).unwrap();
        assert_eq!(first, second);
        // Noise actually moved the values.
        assert_ne!(first[0].vehicles[0].obs[0], trajectories[0][0]);
    }

    #[test]
    fn ragged_trajectories_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.csv");
        let cfg = TrainingExportConfig { t_obs: 4, t_pred: 2, noise_amp: 0.0 };
        let mut bad = episode(2, 9);
        bad[1].pop();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            export_training_batch(&bad, &cfg, &mut rng, &path),
            Err(PredictError::ShapeMismatch(_))
        ));
    }
}
