//! Godunov finite-volume scheme for `u_t + (u²/2)_x + (1 - ∂x²)⁻¹ u_x = 0`.
//!
//! The hyperbolic part uses the exact Riemann flux of Burgers' equation; the
//! nonlocal term enters as an explicit source evaluated at the old time level:
//!
//! ```text
//! u_k^{n+1} = u_k^n - (τ/h) (g(u_k, u_{k+1}) - g(u_{k-1}, u_k)) - τ v_k
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, StateField};
use crate::helmholtz::HelmholtzSolver;
use crate::trajectory::{uniform_output_times, SnapshotRecorder, StepDiagnostics, Trajectory};

pub const DEFAULT_CFL_FACTOR: f64 = 0.4;

/// Godunov flux for `f(u) = u²/2`.
///
/// Shocks (`left >= right`) take the larger flux; rarefactions take the
/// upwind flux unless the fan straddles the sonic point, where the flux is 0.
#[inline]
pub fn godunov_flux(left: f64, right: f64) -> f64 {
    let fl = 0.5 * left * left;
    let fr = 0.5 * right * right;
    if left >= right {
        fl.max(fr)
    } else if left >= 0.0 {
        fl
    } else if right <= 0.0 {
        fr
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GodunovConfig {
    /// Typical size of the data; fixes `τ = cfl_factor h / q`.
    pub q: f64,
    pub t_end: f64,
    pub output_times: Vec<f64>,
    pub cfl_factor: f64,
    /// `false` drops the nonlocal source and leaves plain Burgers.
    pub nonlocal: bool,
}

impl GodunovConfig {
    /// Snapshots default to the initial and final time.
    pub fn new(q: f64, t_end: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "q",
                reason: format!("must be positive, got {q}"),
            });
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("must be positive, got {t_end}"),
            });
        }
        Ok(Self {
            q,
            t_end,
            output_times: vec![0.0, t_end],
            cfl_factor: DEFAULT_CFL_FACTOR,
            nonlocal: true,
        })
    }

    pub fn with_output_times(mut self, times: Vec<f64>) -> Result<Self> {
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter {
                name: "output_times",
                reason: "must be sorted".into(),
            });
        }
        if times.iter().any(|&t| !(0.0..=self.t_end).contains(&t)) {
            return Err(Error::InvalidParameter {
                name: "output_times",
                reason: format!("must lie in [0, {}]", self.t_end),
            });
        }
        self.output_times = times;
        Ok(self)
    }

    pub fn with_output_every(mut self, dt: f64) -> Self {
        self.output_times = uniform_output_times(self.t_end, dt);
        self
    }

    pub fn with_cfl_factor(mut self, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "cfl_factor",
                reason: format!("must lie in (0, 1], got {cfl}"),
            });
        }
        self.cfl_factor = cfl;
        Ok(self)
    }

    pub fn burgers_only(mut self) -> Self {
        self.nonlocal = false;
        self
    }

    pub fn tau(&self, grid: &PeriodicGrid) -> f64 {
        self.cfl_factor * grid.h() / self.q
    }

    /// Step count at the nominal `τ`, before any CFL halving.
    pub fn steps(&self, grid: &PeriodicGrid) -> usize {
        (self.t_end / self.tau(grid) - 1e-9).ceil() as usize
    }
}

/// Reusable stepping kernel holding the work buffers.
#[derive(Debug, Clone)]
pub struct GodunovScheme {
    grid: PeriodicGrid,
    helmholtz: Option<HelmholtzSolver>,
    flux: Vec<f64>,
    source: Vec<f64>,
    scratch: Vec<f64>,
}

impl GodunovScheme {
    pub fn new(grid: PeriodicGrid, nonlocal: bool) -> Self {
        Self::with_solver(grid, nonlocal.then(|| HelmholtzSolver::new(grid)))
    }

    pub fn with_solver(grid: PeriodicGrid, helmholtz: Option<HelmholtzSolver>) -> Self {
        let n = grid.n();
        Self {
            grid,
            helmholtz,
            flux: vec![0.0; n],
            source: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Advances `u` by one step in place. The caller owns the CFL choice.
    pub fn advance(&mut self, u: &mut [f64], tau: f64) {
        let n = self.grid.n();
        debug_assert_eq!(u.len(), n);
        // flux[k] = g(u_k, u_{k+1}) at interface k + 1/2
        for k in 0..n - 1 {
            self.flux[k] = godunov_flux(u[k], u[k + 1]);
        }
        self.flux[n - 1] = godunov_flux(u[n - 1], u[0]);

        if let Some(solver) = &self.helmholtz {
            solver.apply_nonlocal_into(u, &mut self.scratch, &mut self.source);
        }
        let ratio = tau / self.grid.h();
        let mut prev = self.flux[n - 1];
        for (uk, &cur) in u.iter_mut().zip(&self.flux) {
            *uk -= ratio * (cur - prev);
            prev = cur;
        }
        if self.helmholtz.is_some() {
            for (uk, vk) in u.iter_mut().zip(&self.source) {
                *uk -= tau * vk;
            }
        }
    }
}

fn courant(u: &[f64], tau: f64, h: f64) -> f64 {
    u.iter().fold(0.0f64, |m, v| m.max(v.abs())) * tau / h
}

fn first_non_finite(u: &[f64]) -> Option<usize> {
    u.iter().position(|v| !v.is_finite())
}

/// One step of the full scheme with the nonlocal term.
pub fn step(u: &StateField, solver: &HelmholtzSolver, tau: f64) -> Result<StateField> {
    if u.grid().n() != solver.grid().n() {
        return Err(Error::GridMismatch {
            left: solver.grid().n(),
            right: u.grid().n(),
        });
    }
    let nu = courant(u.values(), tau, u.grid().h());
    if nu > 1.0 {
        return Err(Error::CflViolation {
            t: u.time(),
            courant: nu,
        });
    }
    let mut scheme = GodunovScheme::with_solver(*u.grid(), Some(solver.clone()));
    let mut values = u.values().to_vec();
    scheme.advance(&mut values, tau);
    let t = u.time() + tau;
    if let Some(index) = first_non_finite(&values) {
        return Err(Error::NonFinite { t, index });
    }
    Ok(StateField::from_parts_unchecked(*u.grid(), values, t))
}

pub fn run(u0: &StateField, cfg: &GodunovConfig) -> Result<Trajectory> {
    run_observed(u0, cfg, |_, _, _| {})
}

/// Like [`run`], calling `observer(step_index, t, values)` at every time
/// level including the initial one.
pub fn run_observed(
    u0: &StateField,
    cfg: &GodunovConfig,
    mut observer: impl FnMut(usize, f64, &[f64]),
) -> Result<Trajectory> {
    let grid = *u0.grid();
    let h = grid.h();
    let tau_initial = cfg.tau(&grid);
    let mut tau = tau_initial;
    let mut tau_max: f64 = 0.0;
    let mut halvings = 0;

    let mut scheme = GodunovScheme::new(grid, cfg.nonlocal);
    let mut recorder = SnapshotRecorder::new(&cfg.output_times);
    let mut values = u0.values().to_vec();
    let mut diagnostics = vec![StepDiagnostics::from_values(&values, h, 0.0)];
    recorder.observe(grid, &values, 0.0, tau);
    observer(0, 0.0, &values);

    // t = segment_start + k tau avoids drift from repeated addition
    let mut segment_start = 0.0;
    let mut segment_steps = 0usize;
    let mut steps = 0usize;
    let mut t = 0.0;
    while t < cfg.t_end - 1e-9 * tau {
        let mut nu = courant(&values, tau, h);
        if nu > cfg.cfl_factor * (1.0 + 1e-12) {
            while nu > cfg.cfl_factor * (1.0 + 1e-12) {
                tau *= 0.5;
                halvings += 1;
                nu *= 0.5;
                if tau < 1e-12 * tau_initial {
                    return Err(Error::StepUnderflow { t, tau });
                }
            }
            segment_start = t;
            segment_steps = 0;
        }
        scheme.advance(&mut values, tau);
        segment_steps += 1;
        steps += 1;
        t = segment_start + segment_steps as f64 * tau;
        tau_max = tau_max.max(tau);
        if let Some(index) = first_non_finite(&values) {
            return Err(Error::NonFinite { t, index });
        }
        diagnostics.push(StepDiagnostics::from_values(&values, h, t));
        recorder.observe(grid, &values, t, tau);
        observer(steps, t, &values);
    }

    let last = StateField::from_parts_unchecked(grid, values, t);
    Ok(Trajectory {
        snapshots: recorder.finish(&last),
        diagnostics,
        nonlocal: cfg.nonlocal,
        tau_initial,
        tau_max,
        tau_min: tau,
        halvings,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::InitialData;
    use std::f64::consts::PI;

    #[test]
    fn flux_table() {
        assert_eq!(godunov_flux(2.0, -1.0), 2.0);
        assert_eq!(godunov_flux(-1.0, 1.0), 0.0);
        assert_eq!(godunov_flux(0.5, 1.0), 0.125);
        assert_eq!(godunov_flux(-1.0, -0.5), 0.125);
        for a in [-3.0, -0.2, 0.0, 0.7, 5.0] {
            assert_eq!(godunov_flux(a, a), 0.5 * a * a);
        }
    }

    #[test]
    fn flux_is_min_or_max_of_f() {
        // Oracle: brute-force min/max of u²/2 over the Riemann interval.
        let f = |u: f64| 0.5 * u * u;
        let pts: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.15).collect();
        for &a in &pts {
            for &b in &pts {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let sonic = (lo < 0.0 && hi > 0.0).then_some(0.0);
                let samples = (0..=400)
                    .map(|i| lo + (hi - lo) * i as f64 / 400.0)
                    .chain(sonic)
                    .map(f);
                let expected = if a <= b {
                    samples.fold(f64::INFINITY, f64::min)
                } else {
                    samples.fold(f64::NEG_INFINITY, f64::max)
                };
                assert!((godunov_flux(a, b) - expected).abs() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn constant_is_steady() {
        let g = PeriodicGrid::new(64).unwrap();
        let solver = HelmholtzSolver::new(g);
        let u = StateField::constant(g, 0.75).unwrap();
        let next = step(&u, &solver, 0.4 * g.h() / 0.75).unwrap();
        assert!(next.values().iter().all(|&v| (v - 0.75).abs() < 1e-13));
    }

    #[test]
    fn single_step_conserves_mass() {
        let g = PeriodicGrid::new(1000).unwrap();
        let solver = HelmholtzSolver::new(g);
        let u = InitialData::Data1.sample(g).unwrap();
        let next = step(&u, &solver, 0.4 * g.h() / 2.0).unwrap();
        assert!((next.mass() - u.mass()).abs() < 1e-12);
    }

    #[test]
    fn single_step_matches_characteristics() {
        // Oracle: u(x, τ) = u0(x - τ u(x, τ)) solved by fixed-point iteration.
        let g = PeriodicGrid::new(400).unwrap();
        let amp = 0.05;
        let u0 = |x: f64| 1.0 + amp * (2.0 * PI * x).sin();
        let u = StateField::from_fn(g, u0).unwrap();
        let tau = 0.4 * g.h();
        let mut scheme = GodunovScheme::new(g, false);
        let mut values = u.values().to_vec();
        scheme.advance(&mut values, tau);
        let mut err = 0.0f64;
        for (k, v) in values.iter().enumerate() {
            let x = g.x(k);
            let mut w = u0(x);
            for _ in 0..50 {
                w = u0(x - tau * w);
            }
            err = err.max((v - w).abs());
        }
        // local error of a first-order step: O(τ h) with modest constant
        assert!(err < 10.0 * tau * g.h() * amp * 2.0 * PI * 2.0 * PI, "err {err}");
    }

    #[test]
    fn zero_stays_zero() {
        let g = PeriodicGrid::new(100).unwrap();
        let u0 = StateField::constant(g, 0.0).unwrap();
        let traj = run(&u0, &GodunovConfig::new(1.0, 0.5).unwrap().with_output_every(0.1)).unwrap();
        assert_eq!(traj.snapshots.len(), 6);
        for s in &traj.snapshots {
            assert!(s.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn snapshot_times_within_half_step() {
        let g = PeriodicGrid::new(200).unwrap();
        let u0 = InitialData::Data1.sample(g).unwrap();
        let cfg = GodunovConfig::new(2.0, 0.3).unwrap().with_output_every(0.05);
        let traj = run(&u0, &cfg).unwrap();
        assert_eq!(traj.snapshots.len(), cfg.output_times.len());
        for (s, t) in traj.snapshots.iter().zip(&cfg.output_times) {
            assert!((s.time() - t).abs() <= 0.5 * traj.tau_max + 1e-12);
        }
        assert_eq!(traj.steps, cfg.steps(&g));
    }

    #[test]
    fn cfl_guard_halves_step() {
        let g = PeriodicGrid::new(200).unwrap();
        let u0 = InitialData::Data2.sample(g).unwrap();
        // q = 0.5 underestimates max|u0| ~ 1.04
        let traj = run(&u0, &GodunovConfig::new(0.5, 0.1).unwrap()).unwrap();
        assert!(traj.halvings >= 1);
        assert!(traj.tau_max * 1.04 / g.h() <= 0.4 + 1e-9);
    }

    #[test]
    fn step_rejects_cfl_violation() {
        let g = PeriodicGrid::new(10).unwrap();
        let solver = HelmholtzSolver::new(g);
        let u = StateField::constant(g, 1.0).unwrap();
        assert!(matches!(
            step(&u, &solver, 2.0 * g.h()),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(GodunovConfig::new(0.0, 1.0).is_err());
        assert!(GodunovConfig::new(1.0, -1.0).is_err());
        let cfg = GodunovConfig::new(1.0, 1.0).unwrap();
        assert!(cfg.clone().with_output_times(vec![0.5, 0.2]).is_err());
        assert!(cfg.clone().with_output_times(vec![0.5, 1.2]).is_err());
        assert!(cfg.with_cfl_factor(1.5).is_err());
    }
}
