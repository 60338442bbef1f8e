//! Periodic traveling waves `u(x, t) = U(x - ct)`.
//!
//! With `V = -cU + U²/2` the profile equation becomes the periodic boundary
//! value problem
//!
//! ```text
//! V - V'' + c - sqrt(c² + 2V) = 0,      U = c - sqrt(c² + 2V)
//! ```
//!
//! which is solved by damped Newton on the central-difference grid. Branches
//! bifurcate from `V = 0` at `c_n = 1 / (1 + (2πn)²)` and end in a peakon
//! when `min(c² + 2V)` reaches zero.
//!
//! Newton works on the even half `V_0 ..= V_{n/2}` with mirror conditions.
//! Every translate of a solution is again a solution, so the full periodic
//! Jacobian is singular on the branch; restricting to even profiles removes
//! that null direction.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Result;
use crate::godunov::{run_observed, GodunovConfig};
use crate::grid::{PeriodicGrid, StateField};
use crate::helmholtz::HelmholtzSolver;
use crate::trajectory::Trajectory;
use crate::tridiag::solve_tridiagonal;

/// Newton stops once the max-norm residual drops below this.
pub const NEWTON_TOLERANCE: f64 = 1e-12;

/// Peakon detection: `min(c² + 2V) < PEAKON_RATIO c²`.
pub const PEAKON_RATIO: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("Newton converged to the trivial solution V = 0 at c = {c}")]
    TrivialBranch { c: f64 },

    #[error("Newton did not converge at c = {c}: residual {residual:e} after {iterations} iterations")]
    NewtonDiverged { c: f64, iterations: usize, residual: f64 },

    #[error("Newton step could not be damped into the admissible set at c = {c}")]
    DampingFailed { c: f64 },

    #[error("wave speed must be positive, got {0}")]
    InvalidSpeed(f64),

    #[error("traveling-wave grids need an even number of cells, got {0}")]
    OddGrid(usize),

    #[error("continuation stalled at c = {c} (step {step:e})")]
    ContinuationStall { c: f64, step: f64 },

    #[error("invalid continuation request: {0}")]
    InvalidRequest(String),
}

/// `c_n = 1 / (1 + (2πn)²)`, where the `n`-th mode branches off `V = 0`.
pub fn bifurcation_speed(mode: usize) -> f64 {
    let w = 2.0 * PI * mode as f64;
    1.0 / (1.0 + w * w)
}

/// Same bifurcation value for the central-difference operator on `grid`.
pub fn discrete_bifurcation_speed(mode: usize, grid: &PeriodicGrid) -> f64 {
    let h = grid.h();
    let s = (PI * mode as f64 * h).sin();
    1.0 / (1.0 + 4.0 * s * s / (h * h))
}

/// Residual of the discrete V-equation on the full periodic grid.
pub fn wave_residual(c: f64, v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let inv_h2 = 1.0 / (h * h);
    (0..n)
        .map(|k| {
            let lap = (v[(k + 1) % n] - 2.0 * v[k] + v[(k + n - 1) % n]) * inv_h2;
            v[k] - lap + c - (c * c + 2.0 * v[k]).sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub c: f64,
    pub grid: PeriodicGrid,
    pub v: Vec<f64>,
    /// `U = c - sqrt(c² + 2V)`
    pub u: Vec<f64>,
    /// `min_k (c² + 2 V_k)`
    pub discriminant_min: f64,
    /// Max-norm residual of the discrete V-equation on the full grid.
    pub residual: f64,
    pub iterations: usize,
}

impl WaveProfile {
    fn from_half(c: f64, grid: PeriodicGrid, half: &[f64], iterations: usize) -> Self {
        let n = grid.n();
        let v: Vec<f64> = (0..n).map(|k| half[k.min(n - k)]).collect();
        let u = v.iter().map(|&vk| c - (c * c + 2.0 * vk).sqrt()).collect();
        let discriminant_min = v.iter().map(|&vk| c * c + 2.0 * vk).fold(f64::INFINITY, f64::min);
        let residual = wave_residual(c, &v, grid.h())
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));
        Self {
            c,
            grid,
            v,
            u,
            discriminant_min,
            residual,
            iterations,
        }
    }

    pub fn amplitude(&self) -> f64 {
        let max = self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = self.u.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn u_field(&self) -> StateField {
        StateField::from_parts_unchecked(self.grid, self.u.clone(), 0.0)
    }

    pub fn v_field(&self) -> StateField {
        StateField::from_parts_unchecked(self.grid, self.v.clone(), 0.0)
    }

    /// `min(c² + 2V) / c²`; zero in the peakon limit.
    pub fn discriminant_ratio(&self) -> f64 {
        self.discriminant_min / (self.c * self.c)
    }

    pub fn is_near_peakon(&self) -> bool {
        self.discriminant_ratio() < PEAKON_RATIO
    }

    /// Max-norm residual of `-cU + U²/2 + (1 - Δ_h)⁻¹ U = 0`, with the inverse
    /// taken through the same matrix the nonlocal operator uses.
    pub fn profile_equation_residual(&self, solver: &HelmholtzSolver) -> f64 {
        let smoothed = solver
            .apply_inverse(&self.u_field())
            .expect("profile lives on the solver grid");
        self.u
            .iter()
            .zip(smoothed.values())
            .map(|(&u, &w)| (-self.c * u + 0.5 * u * u + w).abs())
            .fold(0.0, f64::max)
    }
}

/// Starting point for [`solve_wave`].
#[derive(Debug, Clone, Copy)]
pub enum WaveSeed<'a> {
    Field(&'a StateField),
    Profile(&'a WaveProfile),
}

impl WaveSeed<'_> {
    fn grid(&self) -> PeriodicGrid {
        match self {
            WaveSeed::Field(f) => *f.grid(),
            WaveSeed::Profile(p) => p.grid,
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            WaveSeed::Field(f) => f.values(),
            WaveSeed::Profile(p) => &p.v,
        }
    }
}

/// `amplitude cos(2πx)` as a V-seed.
pub fn cosine_seed(grid: PeriodicGrid, amplitude: f64) -> StateField {
    StateField::from_fn(grid, |x| amplitude * (2.0 * PI * x).cos()).expect("finite seed")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// A converged `max|V| <= trivial_ratio c²` counts as the trivial branch.
    pub trivial_ratio: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: NEWTON_TOLERANCE,
            max_iterations: 60,
            trivial_ratio: 1e-8,
        }
    }
}

pub fn solve_wave(c: f64, seed: WaveSeed<'_>) -> Result<WaveProfile, WaveError> {
    solve_wave_with(c, seed, NewtonOptions::default())
}

pub fn solve_wave_with(
    c: f64,
    seed: WaveSeed<'_>,
    opts: NewtonOptions,
) -> Result<WaveProfile, WaveError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(WaveError::InvalidSpeed(c));
    }
    let grid = seed.grid();
    let n = grid.n();
    if n % 2 != 0 {
        return Err(WaveError::OddGrid(n));
    }
    let h = grid.h();
    let inv_h2 = 1.0 / (h * h);
    let m = n / 2 + 1;
    let s = seed.values();
    let floor = -0.5 * c * c * (1.0 - 1e-12);
    let mut v: Vec<f64> = (0..m)
        .map(|k| (0.5 * (s[k] + s[(n - k) % n])).max(floor))
        .collect();

    let residual = |v: &[f64], out: &mut [f64]| {
        for k in 0..m {
            let left = if k == 0 { v[1] } else { v[k - 1] };
            let right = if k == m - 1 { v[m - 2] } else { v[k + 1] };
            out[k] = v[k] - (left - 2.0 * v[k] + right) * inv_h2 + c - (c * c + 2.0 * v[k]).sqrt();
        }
    };
    let max_abs = |r: &[f64]| r.iter().fold(0.0f64, |a, b| a.max(b.abs()));

    let mut r = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut trial_r = vec![0.0; m];
    let mut sub = vec![-inv_h2; m];
    let mut sup = vec![-inv_h2; m];
    sup[0] = -2.0 * inv_h2;
    sub[m - 1] = -2.0 * inv_h2;
    let mut diag = vec![0.0; m];

    residual(&v, &mut r);
    let mut norm = max_abs(&r);
    let mut iterations = 0;
    while norm >= opts.tolerance {
        if iterations == opts.max_iterations {
            return Err(WaveError::NewtonDiverged {
                c,
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        for k in 0..m {
            diag[k] = 1.0 + 2.0 * inv_h2 - 1.0 / (c * c + 2.0 * v[k]).sqrt();
        }
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = solve_tridiagonal(&sub, &diag, &sup, &rhs).ok_or(WaveError::DampingFailed { c })?;

        // Backtrack until the square root stays real and the residual drops.
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut admissible = true;
            for k in 0..m {
                trial[k] = v[k] + alpha * delta[k];
                if c * c + 2.0 * trial[k] <= 0.0 {
                    admissible = false;
                    break;
                }
            }
            if admissible {
                residual(&trial, &mut trial_r);
                let trial_norm = max_abs(&trial_r);
                if trial_norm < (1.0 - 1e-4 * alpha) * norm || trial_norm < opts.tolerance {
                    std::mem::swap(&mut v, &mut trial);
                    std::mem::swap(&mut r, &mut trial_r);
                    norm = trial_norm;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            // At the rounding floor no step can improve further.
            if norm < 100.0 * opts.tolerance {
                break;
            }
            return Err(WaveError::DampingFailed { c });
        }
    }

    let vmax = max_abs(&v);
    if vmax <= opts.trivial_ratio * c * c {
        return Err(WaveError::TrivialBranch { c });
    }
    let profile = WaveProfile::from_half(c, grid, &v, iterations);
    if profile.residual >= opts.tolerance {
        return Err(WaveError::NewtonDiverged {
            c,
            iterations,
            residual: profile.residual,
        });
    }
    Ok(profile)
}

/// Solves at `c` from a cosine seed, trying a few amplitudes scaled by `c²`.
pub fn solve_from_cosine(grid: PeriodicGrid, c: f64) -> Result<WaveProfile, WaveError> {
    let mut last = WaveError::TrivialBranch { c };
    for ratio in [0.25, 0.4, 0.1, 0.04, 0.01] {
        let seed = cosine_seed(grid, ratio * c * c);
        match solve_wave(c, WaveSeed::Field(&seed)) {
            Ok(p) => return Ok(p),
            Err(e) => last = e,
        }
    }
    Err(last)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    /// Smallest step before giving up.
    pub min_step: f64,
    /// Initial step when searching past the interval for the branch ends.
    pub endpoint_step: f64,
    pub find_endpoints: bool,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            min_step: 1e-9,
            endpoint_step: 1e-4,
            find_endpoints: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub profiles: Vec<WaveProfile>,
    /// Lowest `c` that still gave a nontrivial profile.
    pub lower_endpoint: Option<f64>,
    /// First `c` at which the profile reached the peakon threshold, or the
    /// last reachable `c` when continuation stalled before it.
    pub upper_endpoint: Option<f64>,
    pub upper_reached_peakon: bool,
}

/// Advances from `from` to `target`, halving the step on failure.
fn continue_to(
    from: &WaveProfile,
    target: f64,
    min_step: f64,
) -> Result<WaveProfile, WaveError> {
    let mut current = from.clone();
    let mut step = target - from.c;
    while current.c != target {
        let next_c = if (target - current.c).abs() <= step.abs() {
            target
        } else {
            current.c + step
        };
        match solve_wave(next_c, WaveSeed::Profile(&current)) {
            Ok(p) => current = p,
            Err(_) if step.abs() * 0.5 >= min_step => step *= 0.5,
            Err(_) => {
                return Err(WaveError::ContinuationStall {
                    c: current.c,
                    step: step.abs(),
                })
            }
        }
    }
    Ok(current)
}

/// Natural-parameter continuation of the first branch over `[c_start, c_stop]`
/// in `steps` equally spaced speeds.
pub fn continue_branch(
    grid: PeriodicGrid,
    c_start: f64,
    c_stop: f64,
    steps: usize,
    opts: ContinuationOptions,
) -> Result<Branch, WaveError> {
    if steps == 0 {
        return Err(WaveError::InvalidRequest("steps must be positive".into()));
    }
    if steps == 1 && c_start != c_stop {
        return Err(WaveError::InvalidRequest(
            "a single step needs c_start == c_stop".into(),
        ));
    }
    let first = solve_from_cosine(grid, c_start)?;
    let mut profiles = vec![first];
    for i in 1..steps {
        let c = c_start + (c_stop - c_start) * i as f64 / (steps - 1) as f64;
        let prev = profiles.last().expect("non-empty");
        profiles.push(continue_to(prev, c, opts.min_step)?);
    }

    let (mut lower, mut upper, mut reached) = (None, None, false);
    if opts.find_endpoints {
        let lowest = profiles
            .iter()
            .min_by(|a, b| a.c.total_cmp(&b.c))
            .expect("non-empty");
        let highest = profiles
            .iter()
            .max_by(|a, b| a.c.total_cmp(&b.c))
            .expect("non-empty");
        lower = Some(lower_endpoint(lowest, opts.endpoint_step, opts.min_step.max(1e-8)));
        let (c, hit) = upper_endpoint(highest, opts.endpoint_step, opts.min_step);
        upper = Some(c);
        reached = hit;
    }
    Ok(Branch {
        profiles,
        lower_endpoint: lower,
        upper_endpoint: upper,
        upper_reached_peakon: reached,
    })
}

/// Marches `c` downward until only the trivial solution remains.
pub fn lower_endpoint(from: &WaveProfile, initial_step: f64, min_step: f64) -> f64 {
    let mut current = from.clone();
    let mut step = initial_step;
    while step >= min_step {
        match solve_wave(current.c - step, WaveSeed::Profile(&current)) {
            Ok(p) => current = p,
            Err(_) => step *= 0.5,
        }
    }
    current.c
}

/// Marches `c` upward until the peakon threshold is hit. Returns the speed
/// and whether the threshold was actually reached.
pub fn upper_endpoint(from: &WaveProfile, initial_step: f64, min_step: f64) -> (f64, bool) {
    let mut current = from.clone();
    if current.is_near_peakon() {
        return (current.c, true);
    }
    let mut step = initial_step;
    while step >= min_step {
        match solve_wave(current.c + step, WaveSeed::Profile(&current)) {
            Ok(p) => {
                if p.is_near_peakon() {
                    return (p.c, true);
                }
                current = p;
            }
            Err(_) => step *= 0.5,
        }
    }
    (current.c, false)
}

/// Disturbance shapes added to a traveling wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Disturbance {
    /// `cos(2kπx)` for `k` in 2..=4.
    Cosine(u32),
    /// `1 - cos(4πx)` on `[0, 1/2)`, zero elsewhere.
    Asymmetric,
}

impl Disturbance {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Disturbance::Cosine(k) => (2.0 * k as f64 * PI * x).cos(),
            Disturbance::Asymmetric => {
                let x = x.rem_euclid(1.0);
                if x < 0.5 {
                    1.0 - (4.0 * PI * x).cos()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Disturbance::Cosine(k) => format!("cos{k}"),
            Disturbance::Asymmetric => "asym".into(),
        }
    }

    pub fn all() -> [Disturbance; 4] {
        [
            Disturbance::Cosine(2),
            Disturbance::Cosine(3),
            Disturbance::Cosine(4),
            Disturbance::Asymmetric,
        ]
    }
}

impl std::str::FromStr for Disturbance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cos2" => Ok(Disturbance::Cosine(2)),
            "cos3" => Ok(Disturbance::Cosine(3)),
            "cos4" => Ok(Disturbance::Cosine(4)),
            "asym" => Ok(Disturbance::Asymmetric),
            other => Err(format!("unknown disturbance `{other}` (expected cos2, cos3, cos4 or asym)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub disturbance: Disturbance,
    pub delta: f64,
}

impl Perturbation {
    /// `delta = percent/100 * (max U - min U)`.
    pub fn percent_of_amplitude(disturbance: Disturbance, percent: f64, profile: &WaveProfile) -> Self {
        Self {
            disturbance,
            delta: 0.01 * percent * profile.amplitude(),
        }
    }
}

/// One point of the two-probe orbit `(u_a, u_b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub step: usize,
    pub t: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveEvolution {
    pub c: f64,
    pub initial: StateField,
    pub trajectory: Trajectory,
    pub orbit: Vec<OrbitSample>,
    pub probe_cells: (usize, usize),
    pub delta: f64,
}

/// Probe cells 300 and 600 of 1000, scaled to the grid.
pub fn probe_cells(grid: &PeriodicGrid) -> (usize, usize) {
    let n = grid.n();
    ((300 * n) / 1000 % n, (600 * n) / 1000 % n)
}

/// Runs the Godunov scheme from `U + δ d` and records the orbit probe at
/// every step.
pub fn evolve_wave_as_initial_data(
    profile: &WaveProfile,
    t_end: f64,
    perturbation: Option<Perturbation>,
    output_dt: f64,
) -> Result<WaveEvolution> {
    let grid = profile.grid;
    let delta = perturbation.map_or(0.0, |p| p.delta);
    let values: Vec<f64> = profile
        .u
        .iter()
        .enumerate()
        .map(|(k, &u)| match perturbation {
            Some(p) => u + p.delta * p.disturbance.eval(grid.x(k)),
            None => u,
        })
        .collect();
    let initial = StateField::new(grid, values, 0.0)?;
    let cfg = GodunovConfig::new(initial.sup_norm(), t_end)?.with_output_every(output_dt);
    let cells = probe_cells(&grid);
    let mut orbit = Vec::with_capacity(cfg.steps(&grid) + 1);
    let trajectory = run_observed(&initial, &cfg, |step, t, u| {
        orbit.push(OrbitSample {
            step,
            t,
            a: u[cells.0],
            b: u[cells.1],
        })
    })?;
    Ok(WaveEvolution {
        c: profile.c,
        initial,
        trajectory,
        orbit,
        probe_cells: cells,
        delta,
    })
}

/// `||u - U(· - ct)||_1 / ||U||_1`, with the translate evaluated by periodic
/// linear interpolation.
pub fn translation_error(profile: &WaveProfile, field: &StateField) -> f64 {
    let grid = profile.grid;
    let n = grid.n();
    let shift = profile.c * field.time() * n as f64;
    let norm: f64 = profile.u.iter().map(|v| v.abs()).sum();
    let err: f64 = field
        .values()
        .iter()
        .enumerate()
        .map(|(k, &u)| {
            let pos = (k as f64 - shift).rem_euclid(n as f64);
            let i = pos.floor() as usize % n;
            let frac = pos - pos.floor();
            let exact = (1.0 - frac) * profile.u[i] + frac * profile.u[(i + 1) % n];
            (u - exact).abs()
        })
        .sum();
    err / norm
}

/// Largest distance from a point of `probe` to the polyline through
/// `reference`.
pub fn orbit_deviation(reference: &[OrbitSample], probe: &[OrbitSample]) -> f64 {
    if reference.is_empty() || probe.is_empty() {
        return 0.0;
    }
    let pts: Vec<(f64, f64)> = reference.iter().map(|s| (s.a, s.b)).collect();
    // bucket size: a few times the typical segment length
    let seg_len = pts
        .windows(2)
        .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let cell = 4.0 * seg_len;
    let key = |p: (f64, f64)| ((p.0 / cell).floor() as i64, (p.1 / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in pts.iter().enumerate() {
        buckets.entry(key(p)).or_default().push(i);
    }
    let seg_dist = |p: (f64, f64), i: usize| -> f64 {
        let a = pts[i];
        let b = if i + 1 < pts.len() { pts[i + 1] } else { a };
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
    };
    let nearest = |p: (f64, f64)| -> f64 {
        let (kx, ky) = key(p);
        let mut radius = 1i64;
        loop {
            let mut best = f64::INFINITY;
            for dx in -radius..=radius {
                for dy in -radius..=radius {
                    if let Some(ids) = buckets.get(&(kx + dx, ky + dy)) {
                        for &i in ids {
                            best = best.min(seg_dist(p, i));
                            if i > 0 {
                                best = best.min(seg_dist(p, i - 1));
                            }
                        }
                    }
                }
            }
            // Anything outside the searched square is at least radius*cell away.
            if best <= radius as f64 * cell {
                return best;
            }
            if radius > 1 << 20 {
                return best;
            }
            radius *= 2;
        }
    };
    probe
        .iter()
        .map(|s| nearest((s.a, s.b)))
        .fold(0.0, f64::max)
}

/// Distance between the orbit start and its closest return after one period
/// `1/c` (searched over the following half period).
pub fn orbit_return_gap(orbit: &[OrbitSample], c: f64) -> Option<f64> {
    let start = orbit.first()?;
    let period = 1.0 / c;
    orbit
        .iter()
        .filter(|s| s.t >= 0.5 * period && s.t <= 1.5 * period)
        .map(|s| ((s.a - start.a).powi(2) + (s.b - start.b).powi(2)).sqrt())
        .min_by(f64::total_cmp)
}
