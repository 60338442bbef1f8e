use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::error::Result;
use crate::godunov::{run, GodunovConfig};
use crate::grid::{StateField, KERNEL_DERIVATIVE_SUP};

/// Allowed excess of the measured ratio over the continuous bound.
pub const L1_SLACK: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    /// `||u(t) - v(t)||₁ / (e^{κt} ||u0 - v0||₁)`
    pub ratios: Vec<f64>,
    pub initial_distance: f64,
    /// `κ`: `sup|K'|` with the nonlocal term, 0 without.
    pub exponent: f64,
    pub max_ratio: f64,
    pub slack: f64,
}

impl StabilityReport {
    pub fn pass(&self) -> bool {
        self.max_ratio <= 1.0 + self.slack
    }
}

/// Runs both initial data with `cfg` and compares their L¹ distance with
/// the growth bound `e^{κt}`.
pub fn l1_stability(u0: &StateField, v0: &StateField, cfg: &GodunovConfig) -> Result<StabilityReport> {
    u0.ensure_same_grid(v0)?;
    let initial_distance = u0.l1_distance(v0)?;
    if initial_distance == 0.0 {
        return Err(DiagnosticsError::ZeroInitialDistance.into());
    }
    let (a, b) = rayon::join(|| run(u0, cfg), || run(v0, cfg));
    let (a, b) = (a?, b?);
    let exponent = if cfg.nonlocal { KERNEL_DERIVATIVE_SUP } else { 0.0 };
    let mut times = Vec::with_capacity(a.snapshots.len());
    let mut distances = Vec::with_capacity(a.snapshots.len());
    let mut ratios = Vec::with_capacity(a.snapshots.len());
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let t = sa.time().max(sb.time());
        let d = sa.l1_distance(sb)?;
        times.push(t);
        distances.push(d);
        ratios.push(d / ((exponent * t).exp() * initial_distance));
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(StabilityReport {
        times,
        distances,
        ratios,
        initial_distance,
        exponent,
        max_ratio,
        slack: L1_SLACK,
    })
}
