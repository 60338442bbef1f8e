//! The nonlocal term `v = (1 - ∂x²)⁻¹ ∂x u`.
//!
//! The production path is the central-difference discretization
//! `(1 + 2/h²) v_k - (v_{k+1} + v_{k-1})/h² = (u_{k+1} - u_{k-1}) / (2h)`,
//! solved as a cyclic tridiagonal system. [`apply_nonlocal_spectral`] is the
//! Fourier reference used to check it.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{PeriodicGrid, StateField};
use crate::tridiag::CyclicTridiagonal;

#[derive(Debug, Clone)]
pub struct HelmholtzSolver {
    grid: PeriodicGrid,
    factor: CyclicTridiagonal,
}

impl HelmholtzSolver {
    pub fn new(grid: PeriodicGrid) -> Self {
        let inv_h2 = 1.0 / (grid.h() * grid.h());
        Self {
            grid,
            factor: CyclicTridiagonal::new(grid.n(), 1.0 + 2.0 * inv_h2, -inv_h2),
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    fn check(&self, u: &StateField) -> Result<()> {
        if u.grid().n() != self.grid.n() {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: u.grid().n(),
            });
        }
        Ok(())
    }

    pub fn apply_nonlocal(&self, u: &StateField) -> Result<StateField> {
        self.check(u)?;
        let mut out = vec![0.0; self.grid.n()];
        let mut rhs = vec![0.0; self.grid.n()];
        self.apply_nonlocal_into(u.values(), &mut rhs, &mut out);
        Ok(StateField::from_parts_unchecked(self.grid, out, u.time()))
    }

    /// Allocation-free variant; `scratch` receives the centered difference.
    pub fn apply_nonlocal_into(&self, u: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        let n = self.grid.n();
        debug_assert!(u.len() == n && scratch.len() == n && out.len() == n);
        let inv_2h = 0.5 / self.grid.h();
        for k in 0..n {
            let right = u[if k + 1 == n { 0 } else { k + 1 }];
            let left = u[if k == 0 { n - 1 } else { k - 1 }];
            scratch[k] = (right - left) * inv_2h;
        }
        self.factor.solve_into(scratch, out);
    }

    /// `(1 - Δ_h)⁻¹ w` with the same matrix, no difference on the right-hand side.
    pub fn apply_inverse(&self, w: &StateField) -> Result<StateField> {
        self.check(w)?;
        let out = self.factor.solve(w.values());
        Ok(StateField::from_parts_unchecked(self.grid, out, w.time()))
    }
}

/// Convenience wrapper building a fresh solver.
pub fn apply_nonlocal(u: &StateField) -> StateField {
    HelmholtzSolver::new(*u.grid())
        .apply_nonlocal(u)
        .expect("solver built on the field's own grid")
}

/// Trigonometric-interpolation evaluation of `(1 - ∂x²)⁻¹ ∂x u`.
///
/// Fourier mode `m` is multiplied by `2πim / (1 + (2πm)²)`. The Nyquist mode
/// is an odd-derivative ambiguity on the grid and is dropped.
pub fn apply_nonlocal_spectral(u: &StateField) -> Result<StateField> {
    let n = u.grid().n();
    if n % 2 != 0 {
        return Err(Error::OddGrid(n));
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        if k == n / 2 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        let w = 2.0 * PI * m;
        *c *= Complex64::new(0.0, w / (1.0 + w * w));
    }
    inverse.process(&mut buf);
    let scale = 1.0 / n as f64;
    let values = buf.iter().map(|c| c.re * scale).collect();
    StateField::new(*u.grid(), values, u.time())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::InitialData;

    fn sine(n: usize) -> StateField {
        StateField::from_fn(PeriodicGrid::new(n).unwrap(), |x| (2.0 * PI * x).sin()).unwrap()
    }

    fn max_abs_diff(a: &StateField, b: &StateField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn constant_maps_to_zero() {
        let g = PeriodicGrid::new(64).unwrap();
        let c = StateField::constant(g, 3.25).unwrap();
        let v = apply_nonlocal(&c);
        assert!(v.sup_norm() < 1e-12);
        let s = apply_nonlocal_spectral(&c).unwrap();
        assert!(s.sup_norm() < 1e-12);
    }

    #[test]
    fn constant_rhs_is_fixed_by_inverse() {
        let g = PeriodicGrid::new(50).unwrap();
        let solver = HelmholtzSolver::new(g);
        let c = StateField::constant(g, -1.5).unwrap();
        let w = solver.apply_inverse(&c).unwrap();
        assert!(w.values().iter().all(|v| (v + 1.5).abs() < 1e-10));
    }

    #[test]
    fn sine_against_continuous_symbol() {
        let u = sine(1000);
        let v = apply_nonlocal(&u);
        let exact = StateField::from_fn(*u.grid(), |x| {
            2.0 * PI * (2.0 * PI * x).cos() / (1.0 + 4.0 * PI * PI)
        })
        .unwrap();
        assert!(max_abs_diff(&v, &exact) < 1e-4);
    }

    #[test]
    fn sine_against_discrete_symbol() {
        // Exact discrete answer: the difference and the matrix share the eigenvector.
        let n = 1000;
        let u = sine(n);
        let h = 1.0 / n as f64;
        let theta = 2.0 * PI * h;
        let symbol = (theta.sin() / h) / (1.0 + 2.0 * (1.0 - theta.cos()) / (h * h));
        let v = apply_nonlocal(&u);
        let exact = StateField::from_fn(*u.grid(), |x| symbol * (2.0 * PI * x).cos()).unwrap();
        assert!(max_abs_diff(&v, &exact) < 1e-12);
    }

    #[test]
    fn spectral_is_exact_on_single_mode() {
        let u = sine(128);
        let s = apply_nonlocal_spectral(&u).unwrap();
        let exact = StateField::from_fn(*u.grid(), |x| {
            2.0 * PI * (2.0 * PI * x).cos() / (1.0 + 4.0 * PI * PI)
        })
        .unwrap();
        assert!(max_abs_diff(&s, &exact) < 1e-14);
    }

    #[test]
    fn nyquist_mode_is_finite() {
        let n = 64;
        let g = PeriodicGrid::new(n).unwrap();
        let u = StateField::from_fn(g, |x| (2.0 * PI * (n / 2) as f64 * x).cos()).unwrap();
        let v = apply_nonlocal(&u);
        assert!(v.values().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn spectral_respects_kernel_bound() {
        let g = PeriodicGrid::new(512).unwrap();
        let u = InitialData::Data2.sample(g).unwrap();
        let s = apply_nonlocal_spectral(&u).unwrap();
        assert!(s.sup_norm() <= 0.5 * u.l1_norm());
    }

    #[test]
    fn odd_grid_rejected_by_spectral() {
        let g = PeriodicGrid::new(9).unwrap();
        let u = StateField::constant(g, 1.0).unwrap();
        assert_eq!(apply_nonlocal_spectral(&u), Err(Error::OddGrid(9)));
    }

    #[test]
    fn grid_mismatch() {
        let solver = HelmholtzSolver::new(PeriodicGrid::new(8).unwrap());
        let u = sine(16);
        assert!(matches!(solver.apply_nonlocal(&u), Err(Error::GridMismatch { .. })));
    }
}
