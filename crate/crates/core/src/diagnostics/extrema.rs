use serde::{Deserialize, Serialize};

use crate::trajectory::Trajectory;

/// Differences at or below this are treated as flat.
pub const PEAK_NOISE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremaSeries {
    pub times: Vec<f64>,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
    pub peaks: Vec<usize>,
}

impl ExtremaSeries {
    /// Whether the peak count goes up at least once.
    pub fn peaks_increase(&self) -> bool {
        self.peaks.windows(2).any(|w| w[1] > w[0])
    }

    /// Largest `|max(t) / max(0) - 1|`.
    pub fn max_relative_variation(&self) -> f64 {
        let m0 = self.max.first().copied().unwrap_or(0.0);
        self.max.iter().map(|m| (m / m0 - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Strict local maxima of a periodic sequence; plateaus count once.
pub fn count_peaks(values: &[f64]) -> usize {
    let n = values.len();
    let signs: Vec<i8> = (0..n)
        .filter_map(|k| {
            let d = values[(k + 1) % n] - values[k];
            if d > PEAK_NOISE_FLOOR {
                Some(1)
            } else if d < -PEAK_NOISE_FLOOR {
                Some(-1)
            } else {
                None
            }
        })
        .collect();
    let m = signs.len();
    (0..m).filter(|&i| signs[i] == 1 && signs[(i + 1) % m] == -1).count()
}

pub fn extrema_series(traj: &Trajectory) -> ExtremaSeries {
    let snaps = &traj.snapshots;
    ExtremaSeries {
        times: snaps.iter().map(|s| s.time()).collect(),
        max: snaps.iter().map(|s| s.max()).collect(),
        min: snaps.iter().map(|s| s.min()).collect(),
        peaks: snaps.iter().map(|s| count_peaks(s.values())).collect(),
    }
}
