use serde::{Deserialize, Serialize};

use crate::grid::{PeriodicGrid, StateField};

/// Scalar summary of one time level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub max: f64,
    pub min: f64,
    pub l1: f64,
    pub l2: f64,
    pub mass: f64,
}

impl StepDiagnostics {
    pub fn of(field: &StateField) -> Self {
        Self::from_values(field.values(), field.grid().h(), field.time())
    }

    pub fn from_values(values: &[f64], h: f64, t: f64) -> Self {
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        let (mut l1, mut l2, mut mass) = (0.0, 0.0, 0.0);
        for &v in values {
            max = max.max(v);
            min = min.min(v);
            l1 += v.abs();
            l2 += v * v;
            mass += v;
        }
        Self {
            t,
            max,
            min,
            l1: l1 * h,
            l2: (l2 * h).sqrt(),
            mass: mass * h,
        }
    }
}

/// Snapshots at the requested output times plus per-step diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<StateField>,
    /// One entry per time level, starting with the initial state.
    pub diagnostics: Vec<StepDiagnostics>,
    /// Whether the nonlocal term was part of the evolution.
    pub nonlocal: bool,
    pub tau_initial: f64,
    /// Largest step actually taken.
    pub tau_max: f64,
    pub tau_min: f64,
    pub halvings: usize,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(StateField::time).collect()
    }

    pub fn first(&self) -> Option<&StateField> {
        self.snapshots.first()
    }

    pub fn last(&self) -> Option<&StateField> {
        self.snapshots.last()
    }

    /// Snapshot whose time is closest to `t`.
    pub fn at(&self, t: f64) -> Option<&StateField> {
        self.snapshots.iter().min_by(|a, b| {
            (a.time() - t)
                .abs()
                .partial_cmp(&(b.time() - t).abs())
                .expect("finite times")
        })
    }

    /// `w(x, t) = u(x, T - t)`: the same snapshots played backwards.
    pub fn time_reversed(&self) -> Trajectory {
        let end = self.last().map_or(0.0, StateField::time);
        let start = self.first().map_or(0.0, StateField::time);
        let snapshots = self
            .snapshots
            .iter()
            .rev()
            .map(|s| s.clone().with_time(start + end - s.time()))
            .collect();
        Trajectory {
            snapshots,
            diagnostics: Vec::new(),
            ..self.clone()
        }
    }

    /// `w(x, t) = u(-x, T - t)`. For this equation the reflection maps smooth
    /// solutions to solutions and turns every admissible shock into an
    /// expansion shock.
    pub fn space_time_reflected(&self) -> Trajectory {
        let mut out = self.time_reversed();
        for s in &mut out.snapshots {
            let n = s.grid().n();
            let v = s.values();
            let flipped: Vec<f64> = (0..n).map(|k| v[(n - k) % n]).collect();
            *s = StateField::from_parts_unchecked(*s.grid(), flipped, s.time());
        }
        out
    }
}

/// Collects snapshots at the step time nearest to each requested output time.
#[derive(Debug)]
pub(crate) struct SnapshotRecorder {
    pending: std::collections::VecDeque<f64>,
    snapshots: Vec<StateField>,
}

impl SnapshotRecorder {
    pub(crate) fn new(output_times: &[f64]) -> Self {
        Self {
            pending: output_times.iter().copied().collect(),
            snapshots: Vec::with_capacity(output_times.len()),
        }
    }

    /// Records the state for every pending time within half a step of `t`.
    pub(crate) fn observe(&mut self, grid: PeriodicGrid, values: &[f64], t: f64, tau: f64) {
        while let Some(&next) = self.pending.front() {
            if t >= next - 0.5 * tau {
                self.snapshots
                    .push(StateField::from_parts_unchecked(grid, values.to_vec(), t));
                self.pending.pop_front();
            } else {
                break;
            }
        }
    }

    pub(crate) fn finish(mut self, last: &StateField) -> Vec<StateField> {
        for _ in self.pending.drain(..) {
            self.snapshots.push(last.clone());
        }
        self.snapshots
    }
}

/// `0, dt, 2 dt, ...` up to and including `t_end` (within rounding).
pub fn uniform_output_times(t_end: f64, dt: f64) -> Vec<f64> {
    assert!(dt > 0.0 && t_end >= 0.0);
    let count = (t_end / dt + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|k| k as f64 * dt).collect();
    if let Some(last) = times.last_mut() {
        if (t_end - *last).abs() < 1e-9 * dt {
            *last = t_end;
        }
    }
    if times.last().is_some_and(|&l| l < t_end - 1e-9 * dt) {
        times.push(t_end);
    }
    times
}
