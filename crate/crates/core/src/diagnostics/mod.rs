//! Post-processing of trajectories: shocks, entropy inequalities, L¹
//! stability and extrema.

mod entropy;
mod extrema;
mod shocks;
mod stability;

pub use entropy::{
    default_test_functions, entropy_residual, entropy_tolerance, lambda_grid, EntropyReport,
    TestFunction, C_ENT,
};
pub use extrema::{count_peaks, extrema_series, ExtremaSeries, PEAK_NOISE_FLOOR};
pub use shocks::{
    default_threshold, detect_shocks, first_detection, jump_monotonicity, rankine_hugoniot, track_shock,
    JumpMonotonicity, RankineHugoniot, JUMP_MONOTONE_FRACTION, ShockRecord, ShockTrack, ShockTracks, TrackEnd,
    ONE_SIDED_OFFSET, SPEED_WINDOW,
};
pub use stability::{l1_stability, StabilityReport, L1_SLACK};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("track has {len} records, need at least {needed}")]
    TrackTooShort { len: usize, needed: usize },

    #[error("initial fields coincide; the stability ratio is undefined")]
    ZeroInitialDistance,

    #[error("test function centred at (x = {x0}, t = {t0}) leaves the sampled domain")]
    SupportLeak { x0: f64, t0: f64 },

    #[error("snapshot spacing {spacing:e} exceeds {limit:e}")]
    SparseSnapshots { spacing: f64, limit: f64 },

    #[error("trajectory has fewer than {0} snapshots")]
    TooFewSnapshots(usize),

    #[error("speed window must cover at least {SPEED_WINDOW} snapshots, got {0}")]
    WindowTooSmall(usize),
}
