//! Straight multi-lane road geometry.

use serde::{Deserialize, Serialize};

/// A straight road segment with parallel lanes. Lane 0 sits at `y = 0` and
/// lane centers increase to the left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneLayout {
    pub lane_count: usize,
    pub lane_width: f64,
}

impl LaneLayout {
    pub fn new(lane_count: usize, lane_width: f64) -> Self {
        Self { lane_count, lane_width }
    }

    /// Center line `y` of a lane.
    pub fn center(&self, lane: usize) -> f64 {
        debug_assert!(lane < self.lane_count);
        lane as f64 * self.lane_width
    }

    /// Lane whose corridor contains `y`, if any.
    pub fn lane_at(&self, y: f64) -> Option<usize> {
        for lane in 0..self.lane_count {
            if (y - self.center(lane)).abs() <= self.lane_width / 2.0 {
                return Some(lane);
            }
        }
        None
    }

    /// True if `y` lies within the corridor of `lane`.
    pub fn in_lane(&self, y: f64, lane: usize) -> bool {
        (y - self.center(lane)).abs() <= self.lane_width / 2.0
    }
}

impl Default for LaneLayout {
    fn default() -> Self {
        Self { lane_count: 3, lane_width: 3.7 }
    }
}
