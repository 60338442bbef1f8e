//! Phase-plane shooting for single-jump periodic traveling waves.
//!
//! Between jumps a profile with integration constant `β` satisfies
//!
//! ```text
//! Y' = Z / Y,     Z' = Y²/2 + Y - β
//! ```
//!
//! A single jump at the period boundary would need `Y(0) + Y(1) = 0` and
//! `Z(1) = Z(0)`. [`phase_shoot`] integrates from `(y0, z0)` over `[0, 1]`
//! and returns that mismatch.
//!
//! Near `Y = 0` the right-hand side blows up, so the integrator switches to
//! `W = Y²/2`, in which `W' = Z` and `Z' = W + σ sqrt(2W) - β` with
//! `σ = sign Y`. A regular passage through `Y = 0` needs `Z = 0` there;
//! otherwise `W` would have to turn negative and the trajectory ends.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("shooting needs y0 != 0")]
    ZeroStart,

    #[error("trajectory escaped to |Y| = {y:e} at x = {x}")]
    NoReturn { x: f64, y: f64 },

    #[error("trajectory reached Y = 0 with Z = {z:e} at x = {x}")]
    SingularCrossing { x: f64, z: f64 },

    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrajectory {
    pub beta: f64,
    pub samples: Vec<PhaseSample>,
    /// Positions where `Y` changed sign.
    pub events: Vec<f64>,
}

impl PhaseTrajectory {
    /// Largest local defect of `W_{i+1} - W_i = ∫ Z`, with the integral taken
    /// by the end-corrected trapezoid rule. Relative to `max(1, |W|)`.
    pub fn identity_defect(&self, beta: f64) -> f64 {
        self.samples
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let dx = b.x - a.x;
                let dz = |s: PhaseSample| 0.5 * s.y * s.y + s.y - beta;
                let integral = 0.5 * dx * (a.z + b.z) + dx * dx / 12.0 * (dz(a) - dz(b));
                let dw = 0.5 * (b.y * b.y - a.y * a.y);
                (dw - integral).abs() / (0.5 * a.y * a.y).max(1.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn end(&self) -> PhaseSample {
        *self.samples.last().expect("trajectory has samples")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    pub trajectory: PhaseTrajectory,
    /// `(Y(1) + Y(0), Z(1) - Z(0))`
    pub residual: [f64; 2],
}

impl ShootResult {
    pub fn residual_norm(&self) -> f64 {
        self.residual[0].hypot(self.residual[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub rtol: f64,
    pub atol: f64,
    pub y_max: f64,
    /// Integrate in `(W, Z)` while `|Y|` is below this.
    pub y_switch: f64,
    /// `|Z|` below this at `W = 0` counts as a passage through the origin.
    pub crossing_tol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            y_max: 1e3,
            y_switch: 1e-2,
            crossing_tol: 1e-6,
        }
    }
}

/// Stationary points `(-1 ± sqrt(2β + 1), 0)`; none when `2β + 1 < 0`.
pub fn phase_equilibria(beta: f64) -> Vec<(f64, f64)> {
    let d = 2.0 * beta + 1.0;
    if d < 0.0 {
        Vec::new()
    } else if d == 0.0 {
        vec![(-1.0, 0.0)]
    } else {
        vec![(-1.0 - d.sqrt(), 0.0), (-1.0 + d.sqrt(), 0.0)]
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One embedded step. Returns the 5th-order state and the error estimate.
fn dopri_step<F: Fn(f64, [f64; 2]) -> [f64; 2]>(
    f: &F,
    x: f64,
    s: [f64; 2],
    h: f64,
) -> ([f64; 2], [f64; 2]) {
    let mut k = [[0.0; 2]; 7];
    for i in 0..7 {
        let mut stage = s;
        for (j, kj) in k.iter().enumerate().take(i) {
            stage[0] += h * A[i][j] * kj[0];
            stage[1] += h * A[i][j] * kj[1];
        }
        k[i] = f(x + C[i] * h, stage);
    }
    let mut hi = s;
    let mut err = [0.0; 2];
    for i in 0..7 {
        for d in 0..2 {
            hi[d] += h * B5[i] * k[i][d];
            err[d] += h * (B5[i] - B4[i]) * k[i][d];
        }
    }
    (hi, err)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Chart {
    /// state = (Y, Z)
    Direct,
    /// state = (W, Z), Y = sigma sqrt(2W)
    Regular { sigma: f64 },
}

pub fn phase_shoot(beta: f64, y0: f64, z0: f64) -> Result<ShootResult, PhaseError> {
    phase_shoot_with(beta, y0, z0, ShootOptions::default())
}

pub fn phase_shoot_with(
    beta: f64,
    y0: f64,
    z0: f64,
    opts: ShootOptions,
) -> Result<ShootResult, PhaseError> {
    if y0 == 0.0 {
        return Err(PhaseError::ZeroStart);
    }
    let direct = |_x: f64, s: [f64; 2]| [s[1] / s[0], 0.5 * s[0] * s[0] + s[0] - beta];

    let mut chart = Chart::Direct;
    let mut state = [y0, z0];
    if y0.abs() < opts.y_switch {
        chart = Chart::Regular { sigma: y0.signum() };
        state = [0.5 * y0 * y0, z0];
    }
    let to_sample = |x: f64, chart: Chart, s: [f64; 2]| match chart {
        Chart::Direct => PhaseSample { x, y: s[0], z: s[1] },
        Chart::Regular { sigma } => PhaseSample {
            x,
            y: sigma * (2.0 * s[0].max(0.0)).sqrt(),
            z: s[1],
        },
    };

    let mut x = 0.0;
    let mut h: f64 = 1e-3;
    let h_min = 1e-14;
    let mut samples = vec![PhaseSample { x: 0.0, y: y0, z: z0 }];
    let mut events = Vec::new();
    let mut stalled = 0usize;

    while x < 1.0 {
        h = h.min(1.0 - x);
        let (next, err) = match chart {
            Chart::Direct => dopri_step(&direct, x, state, h),
            Chart::Regular { sigma } => {
                let regular = |_x: f64, s: [f64; 2]| {
                    [s[1], s[0] + sigma * (2.0 * s[0].max(0.0)).sqrt() - beta]
                };
                dopri_step(&regular, x, state, h)
            }
        };
        let scale = |i: usize| opts.atol + opts.rtol * state[i].abs().max(next[i].abs());
        let e = ((err[0] / scale(0)).powi(2) + (err[1] / scale(1)).powi(2)).sqrt() / 2f64.sqrt();

        let leaves_chart = match chart {
            Chart::Direct => next[0].signum() != state[0].signum() || next[0].abs() < 0.5 * opts.y_switch,
            Chart::Regular { .. } => next[0] < 0.0,
        };
        if e <= 1.0 && !leaves_chart && next.iter().all(|v| v.is_finite()) {
            x += h;
            state = next;
            stalled = 0;
            let sample = to_sample(x, chart, state);
            samples.push(sample);
            if sample.y.abs() > opts.y_max {
                return Err(PhaseError::NoReturn { x, y: sample.y });
            }
            match chart {
                Chart::Direct if state[0].abs() < opts.y_switch => {
                    chart = Chart::Regular { sigma: state[0].signum() };
                    state = [0.5 * state[0] * state[0], state[1]];
                }
                Chart::Regular { sigma } if (2.0 * state[0]).sqrt() > 2.0 * opts.y_switch => {
                    chart = Chart::Direct;
                    state = [sigma * (2.0 * state[0]).sqrt(), state[1]];
                }
                _ => {}
            }
            let grow = if e > 0.0 { 0.9 * e.powf(-0.2) } else { 5.0 };
            h *= grow.clamp(0.2, 5.0);
            continue;
        }

        if leaves_chart && e <= 1.0 && h <= h_min {
            // W is at zero to within the step floor.
            if let Chart::Regular { sigma } = chart {
                if state[1].abs() > opts.crossing_tol {
                    return Err(PhaseError::SingularCrossing { x, z: state[1] });
                }
                chart = Chart::Regular { sigma: -sigma };
                state[0] = 0.0;
                events.push(x);
                h = 1e-6;
                continue;
            }
        }
        let shrink = if e > 1.0 && e.is_finite() { 0.9 * e.powf(-0.25) } else { 0.5 };
        h *= shrink.clamp(0.1, 0.5);
        if h < h_min {
            stalled += 1;
            if matches!(chart, Chart::Regular { .. }) && stalled < 200 {
                h = h_min;
                continue;
            }
            return Err(PhaseError::StepUnderflow { x });
        }
    }

    let trajectory = PhaseTrajectory {
        beta,
        samples,
        events,
    };
    let end = trajectory.end();
    Ok(ShootResult {
        residual: [end.y + y0, end.z - z0],
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaScan {
    pub beta: f64,
    pub attempted: usize,
    pub completed: usize,
    pub no_return: usize,
    pub singular: usize,
    pub min_residual: f64,
    /// `(y0, z0)` of the smallest residual.
    pub argmin: Option<(f64, f64)>,
    /// Largest deviation of a trajectory started at an equilibrium.
    pub equilibrium_drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseScanReport {
    pub betas: Vec<BetaScan>,
}

impl PhaseScanReport {
    pub fn min_residual(&self) -> f64 {
        self.betas.iter().map(|b| b.min_residual).fold(f64::INFINITY, f64::min)
    }
}

/// Shooting starts on a rectangular grid, skipping `|y0| < y_gap`.
pub fn scan_initial_conditions(ny: usize, nz: usize, y_gap: f64) -> Vec<(f64, f64)> {
    let ys = (0..ny).map(|i| -3.0 + 6.0 * i as f64 / (ny - 1) as f64);
    let ys: Vec<f64> = ys.filter(|y| y.abs() >= y_gap).collect();
    let mut out = Vec::with_capacity(ys.len() * nz);
    for &y in &ys {
        for j in 0..nz {
            out.push((y, -2.0 + 4.0 * j as f64 / (nz - 1) as f64));
        }
    }
    out
}

/// Shoots every `(y0, z0)` for each `β` in parallel and keeps the smallest
/// residual. Also checks that equilibria stay put.
pub fn phase_scan(betas: &[f64], starts: &[(f64, f64)]) -> PhaseScanReport {
    let betas = betas
        .iter()
        .map(|&beta| {
            let results: Vec<(f64, f64, Result<f64, PhaseError>)> = starts
                .par_iter()
                .map(|&(y0, z0)| (y0, z0, phase_shoot(beta, y0, z0).map(|r| r.residual_norm())))
                .collect();
            let mut scan = BetaScan {
                beta,
                attempted: results.len(),
                completed: 0,
                no_return: 0,
                singular: 0,
                min_residual: f64::INFINITY,
                argmin: None,
                equilibrium_drift: None,
            };
            for (y0, z0, r) in results {
                match r {
                    Ok(norm) => {
                        scan.completed += 1;
                        if norm < scan.min_residual {
                            scan.min_residual = norm;
                            scan.argmin = Some((y0, z0));
                        }
                    }
                    Err(PhaseError::NoReturn { .. }) => scan.no_return += 1,
                    Err(_) => scan.singular += 1,
                }
            }
            scan.equilibrium_drift = phase_equilibria(beta)
                .into_iter()
                .filter(|&(y, _)| y != 0.0)
                .map(|(y, z)| equilibrium_drift(beta, y, z))
                .reduce(f64::max);
            scan
        })
        .collect();
    PhaseScanReport { betas }
}

/// Max distance from `(y, z)` along a trajectory started there.
pub fn equilibrium_drift(beta: f64, y: f64, z: f64) -> f64 {
    match phase_shoot(beta, y, z) {
        Ok(r) => r
            .trajectory
            .samples
            .iter()
            .map(|s| (s.y - y).hypot(s.z - z))
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibria_are_stationary() {
        for beta in [-0.4, 0.0, 0.5, 1.0] {
            for (y, z) in phase_equilibria(beta) {
                if y == 0.0 {
                    continue;
                }
                let r = phase_shoot(beta, y, z).unwrap();
                assert!(equilibrium_drift(beta, y, z) < 1e-12, "beta {beta} y {y}");
                assert!((r.residual[0] - 2.0 * y).abs() < 1e-12);
                assert!(r.residual[1].abs() < 1e-12);
            }
        }
        assert!(phase_equilibria(-1.0).is_empty());
    }

    #[test]
    fn z_nondecreasing_without_equilibria() {
        for (y0, z0) in [(0.5, -1.0), (-2.0, 0.3), (1.5, 1.0)] {
            if let Ok(r) = phase_shoot(-1.0, y0, z0) {
                assert!(r.trajectory.samples.windows(2).all(|w| w[1].z >= w[0].z - 1e-12));
            }
        }
    }

    #[test]
    fn matches_closed_form_for_constant_z_flow() {
        // beta chosen so that Z' vanishes at the start: short-time Taylor check.
        let (y0, z0) = (2.0, 0.5);
        let beta = 0.5 * y0 * y0 + y0;
        let r = phase_shoot_with(beta, y0, z0, ShootOptions::default()).unwrap();
        let s = r.trajectory.samples[1];
        let expected = (y0 * y0 + 2.0 * z0 * s.x).sqrt();
        assert!((s.y - expected).abs() < 1e-6 * s.x.max(1e-3));
    }

    #[test]
    fn identity_defect_small() {
        let r = phase_shoot(0.5, 1.2, -0.3).unwrap();
        assert!(r.trajectory.identity_defect(0.5) < 1e-8);
    }

    #[test]
    fn singular_crossing_reported() {
        // Y heading to zero with Z < 0 cannot pass through the axis.
        let err = phase_shoot(0.0, 0.05, -1.0).unwrap_err();
        assert!(matches!(err, PhaseError::SingularCrossing { .. }), "{err:?}");
    }

    #[test]
    fn zero_start_rejected() {
        assert_eq!(phase_shoot(0.0, 0.0, 1.0), Err(PhaseError::ZeroStart));
    }

    #[test]
    fn scan_counts_add_up() {
        let starts = scan_initial_conditions(8, 5, 0.1);
        let rep = phase_scan(&[0.0, 1.0], &starts);
        for b in &rep.betas {
            assert_eq!(b.attempted, starts.len());
            assert_eq!(b.completed + b.no_return + b.singular, b.attempted);
        }
    }
}
