//! Uniform periodic grid on the unit torus, the field container, the
//! initial-data catalogue and the closed-form Helmholtz kernel.
//!
//! Cell values are point samples at `x_k = k h`, not cell averages.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 4;

/// Supremum of `|K'|` on the torus, attained at the kink `x = 0`.
pub const KERNEL_DERIVATIVE_SUP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    n: usize,
    h: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_CELLS {
            return Err(Error::GridTooSmall(n));
        }
        Ok(Self {
            n,
            h: 1.0 / n as f64,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// Index `k + offset` wrapped onto `0..n`.
    #[inline]
    pub fn neighbor(&self, k: usize, offset: isize) -> usize {
        let n = self.n as isize;
        (k as isize + offset).rem_euclid(n) as usize
    }

    pub fn cell_centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.x(k))
    }

    /// Cell index nearest to `x`, taken modulo 1.
    pub fn nearest_cell(&self, x: f64) -> usize {
        let k = (x.rem_euclid(1.0) * self.n as f64).round() as usize;
        k % self.n
    }
}

/// Values of one scalar field on a [`PeriodicGrid`] at a single time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateField {
    grid: PeriodicGrid,
    values: Vec<f64>,
    time: f64,
}

impl StateField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index, value });
        }
        Ok(Self { grid, values, time })
    }

    /// Samples `f` at the cell points `x_k = k h`.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.cell_centers().map(f).collect(), 0.0)
    }

    pub fn constant(grid: PeriodicGrid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.n()], 0.0)
    }

    pub(crate) fn from_parts_unchecked(grid: PeriodicGrid, values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values, time }
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn ensure_same_grid(&self, other: &StateField) -> Result<()> {
        if self.grid.n() != other.grid.n() {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            });
        }
        Ok(())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn oscillation(&self) -> f64 {
        self.max() - self.min()
    }

    /// Discrete mass `sum u_k h`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.h()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.h()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Grid inner product `sum u_k w_k h`. Panics if lengths differ.
    pub fn dot(&self, other: &StateField) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "dot on mismatched grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.h()
    }

    /// `sum |u_k - w_k| h`.
    pub fn l1_distance(&self, other: &StateField) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.h())
    }

    /// Pointwise `self + scale * other`.
    pub fn axpy(&self, scale: f64, other: &StateField) -> Result<StateField> {
        self.ensure_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + scale * b)
            .collect();
        StateField::new(self.grid, values, self.time)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<StateField> {
        StateField::new(self.grid, self.values.iter().map(|&v| f(v)).collect(), self.time)
    }
}

/// Closed-form Green's function of `1 - d²/dx²` on the torus,
/// `K(x) = (e^x + e^{1-x}) / (2(e - 1))` for `0 <= x <= 1`.
pub fn eval_kernel(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::KernelDomain(x));
    }
    Ok((x.exp() + (1.0 - x).exp()) / (2.0 * (E - 1.0)))
}

/// `K'(x)` on the open interval `(0, 1)`; one-sided limits at the ends are `∓1/2`.
pub fn eval_kernel_derivative(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::KernelDomain(x));
    }
    Ok((x.exp() - (1.0 - x).exp()) / (2.0 * (E - 1.0)))
}

/// Initial data presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "lowercase")]
pub enum InitialData {
    /// `cos(2πx + 0.5) + 1`
    Data1,
    /// `0.2 cos(2πx) + 0.1 cos(4πx) - 0.3 sin(6πx) + 0.5`
    Data2,
    /// `q cos(2πx)`
    Cosine { q: f64 },
    /// `sum_{k<=3} a_k cos(2kπx) + b_k sin(2kπx)`
    Fourier { a: Vec<f64>, b: Vec<f64> },
}

impl InitialData {
    /// Up to three modes on each side.
    pub fn fourier(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() > 3 || b.len() > 3 {
            return Err(Error::InvalidParameter {
                name: "fourier",
                reason: format!("at most 3 modes allowed, got {} cosine and {} sine", a.len(), b.len()),
            });
        }
        Ok(InitialData::Fourier { a, b })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let w = 2.0 * PI * x;
        match self {
            InitialData::Data1 => (w + 0.5).cos() + 1.0,
            InitialData::Data2 => {
                0.2 * w.cos() + 0.1 * (2.0 * w).cos() - 0.3 * (3.0 * w).sin() + 0.5
            }
            InitialData::Cosine { q } => q * w.cos(),
            InitialData::Fourier { a, b } => {
                let cos: f64 = a
                    .iter()
                    .enumerate()
                    .map(|(k, ak)| ak * ((k + 1) as f64 * w).cos())
                    .sum();
                let sin: f64 = b
                    .iter()
                    .enumerate()
                    .map(|(k, bk)| bk * ((k + 1) as f64 * w).sin())
                    .sum();
                cos + sin
            }
        }
    }

    pub fn sample(&self, grid: PeriodicGrid) -> Result<StateField> {
        StateField::from_fn(grid, |x| self.eval(x))
    }

    /// Looks a preset up by id; `amplitude` feeds the cosine preset.
    pub fn from_preset(name: &str, amplitude: f64) -> Result<Self> {
        match name.parse::<PresetId>()? {
            PresetId::Data1 => Ok(InitialData::Data1),
            PresetId::Data2 => Ok(InitialData::Data2),
            PresetId::Cosine => Ok(InitialData::Cosine { q: amplitude }),
            PresetId::Fourier => Err(Error::InvalidParameter {
                name: "data",
                reason: "the fourier preset needs explicit coefficients".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetId {
    Data1,
    Data2,
    Cosine,
    Fourier,
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "data1" => Ok(PresetId::Data1),
            "data2" => Ok(PresetId::Data2),
            "cosine" => Ok(PresetId::Cosine),
            "fourier" => Ok(PresetId::Fourier),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PresetId::Data1 => "data1",
            PresetId::Data2 => "data2",
            PresetId::Cosine => "cosine",
            PresetId::Fourier => "fourier",
        })
    }
}
