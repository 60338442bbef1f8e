use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::helmholtz::HelmholtzSolver;
use crate::trajectory::Trajectory;

/// Constant in the entropy tolerance `C_ENT (h + τ)`. Fixed after comparing
/// Godunov runs with exact Burgers solutions (observed constants below 0.1).
pub const C_ENT: f64 = 1.0;

/// Snapshots must be at most this many time steps apart.
const MAX_SNAPSHOT_GAP_STEPS: f64 = 10.0;

pub fn entropy_tolerance(h: f64, tau: f64) -> f64 {
    C_ENT * (h + tau)
}

/// `φ(x, t) = B((x - x0)/rx) B((t - t0)/rt)`, `B(s) = exp(-1/(1 - s²))`,
/// periodic in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub x0: f64,
    pub t0: f64,
    pub radius_x: f64,
    pub radius_t: f64,
}

fn bump(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let b = (-1.0 / q).exp();
    (b, -2.0 * s / (q * q) * b)
}

impl TestFunction {
    /// `(φ, φ_t, φ_x)`
    fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        let mut dx = (x - self.x0).rem_euclid(1.0);
        if dx > 0.5 {
            dx -= 1.0;
        }
        let (bx, dbx) = bump(dx / self.radius_x);
        if bx == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let (bt, dbt) = bump((t - self.t0) / self.radius_t);
        (bx * bt, bx * dbt / self.radius_t, dbx * bt / self.radius_x)
    }
}

/// Four centres in space times three in time, spread over the interior of
/// `[t_start, t_end]`.
pub fn default_test_functions(t_start: f64, t_end: f64) -> Vec<TestFunction> {
    let span = t_end - t_start;
    let radius_t = 0.277 * span;
    let mut out = Vec::with_capacity(12);
    for t in [0.3077, 0.5077, 0.7077] {
        for x0 in [0.125, 0.375, 0.625, 0.875] {
            out.push(TestFunction {
                x0,
                t0: t_start + t * span,
                radius_x: 0.18,
                radius_t,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub lambdas: Vec<f64>,
    pub test_functions: Vec<TestFunction>,
    /// `integrals[i][j]` for `lambdas[i]` and `test_functions[j]`.
    pub integrals: Vec<Vec<f64>>,
    pub min_integral: f64,
    pub c_ent: f64,
    pub tolerance: f64,
}

impl EntropyReport {
    pub fn pass(&self) -> bool {
        self.min_integral >= -self.tolerance
    }
}

/// `n` equally spaced values over `[min u - 0.5, max u + 0.5]`.
pub fn lambda_grid(traj: &Trajectory, n: usize) -> Vec<f64> {
    let lo = traj.snapshots.iter().map(|s| s.min()).fold(f64::INFINITY, f64::min) - 0.5;
    let hi = traj.snapshots.iter().map(|s| s.max()).fold(f64::NEG_INFINITY, f64::max) + 0.5;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).collect()
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Discretized entropy inequality
///
/// ```text
/// ∫∫ |u - λ| φ_t + sgn(u - λ) (u² - λ²)/2 φ_x - sgn(u - λ) (K' * u) φ  dx dt
/// ```
///
/// with the trapezoid rule in `t` over the snapshot times and the periodic
/// rectangle rule in `x`. The nonlocal term is dropped for Burgers-only
/// trajectories.
pub fn entropy_residual(
    traj: &Trajectory,
    lambdas: &[f64],
    test_functions: &[TestFunction],
) -> Result<EntropyReport, DiagnosticsError> {
    let snaps = &traj.snapshots;
    if snaps.len() < 3 {
        return Err(DiagnosticsError::TooFewSnapshots(3));
    }
    let (t_first, t_last) = (snaps[0].time(), snaps[snaps.len() - 1].time());
    let limit = MAX_SNAPSHOT_GAP_STEPS * traj.tau_max.max(traj.tau_initial);
    let spacing = snaps
        .windows(2)
        .map(|w| (w[1].time() - w[0].time()).abs())
        .fold(0.0, f64::max);
    if spacing > limit * (1.0 + 1e-9) {
        return Err(DiagnosticsError::SparseSnapshots { spacing, limit });
    }
    for f in test_functions {
        if f.t0 - f.radius_t < t_first.min(t_last)
            || f.t0 + f.radius_t > t_first.max(t_last)
            || f.radius_x >= 0.5
        {
            return Err(DiagnosticsError::SupportLeak { x0: f.x0, t0: f.t0 });
        }
    }

    let grid = *snaps[0].grid();
    let h = grid.h();
    let nonlocal: Vec<Vec<f64>> = if traj.nonlocal {
        let solver = HelmholtzSolver::new(grid);
        snaps
            .par_iter()
            .map(|s| solver.apply_nonlocal(s).expect("same grid").into_values())
            .collect()
    } else {
        vec![vec![0.0; grid.n()]; snaps.len()]
    };
    // trapezoid weights in time
    let weights: Vec<f64> = (0..snaps.len())
        .map(|j| {
            let left = if j > 0 { snaps[j].time() - snaps[j - 1].time() } else { 0.0 };
            let right = if j + 1 < snaps.len() { snaps[j + 1].time() - snaps[j].time() } else { 0.0 };
            0.5 * (left + right).abs()
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..lambdas.len())
        .flat_map(|i| (0..test_functions.len()).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let lambda = lambdas[i];
            let phi = test_functions[j];
            let mut total = 0.0;
            for (s, snap) in snaps.iter().enumerate() {
                let t = snap.time();
                if ((t - phi.t0) / phi.radius_t).abs() >= 1.0 {
                    continue;
                }
                let mut row = 0.0;
                for (k, &u) in snap.values().iter().enumerate() {
                    let (p, pt, px) = phi.eval(grid.x(k), t);
                    if p == 0.0 {
                        continue;
                    }
                    let sg = sgn(u - lambda);
                    row += (u - lambda).abs() * pt + sg * 0.5 * (u * u - lambda * lambda) * px
                        - sg * nonlocal[s][k] * p;
                }
                total += weights[s] * h * row;
            }
            total
        })
        .collect();

    let mut integrals = vec![vec![0.0; test_functions.len()]; lambdas.len()];
    for (&(i, j), v) in pairs.iter().zip(values) {
        integrals[i][j] = v;
    }
    let min_integral = integrals.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    Ok(EntropyReport {
        lambdas: lambdas.to_vec(),
        test_functions: test_functions.to_vec(),
        integrals,
        min_integral,
        c_ent: C_ENT,
        tolerance: entropy_tolerance(h, traj.tau_initial),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_derivative_matches_difference() {
        for s in [-0.9, -0.3, 0.0, 0.4, 0.8] {
            let e = 1e-6;
            let fd = (bump(s + e).0 - bump(s - e).0) / (2.0 * e);
            assert!((fd - bump(s).1).abs() < 1e-7);
        }
        assert_eq!(bump(1.0), (0.0, 0.0));
    }

    #[test]
    fn default_functions_inside_interval() {
        for f in default_test_functions(0.0, 0.65) {
            assert!(f.t0 - f.radius_t > 0.0 && f.t0 + f.radius_t < 0.65);
        }
        assert_eq!(default_test_functions(0.0, 1.0).len(), 12);
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sgn(0.0), 0.0);
        assert_eq!(sgn(-2.0), -1.0);
    }
}
