use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::grid::StateField;
use crate::trajectory::Trajectory;

/// One-sided values are read starting this many cells out from the cells
/// adjacent to the interface.
pub const ONE_SIDED_OFFSET: usize = 3;

/// Cells searched outward from the offset for the edge of the layer.
const EDGE_WINDOW: usize = 3;

/// Snapshots a track may go undetected before it is closed.
pub const MAX_MISSED: usize = 2;

/// Minimum number of snapshots in a speed fit.
pub const SPEED_WINDOW: usize = 5;

/// Steepest single-cell drop as a fraction of the layer jump; admits layers
/// smeared over up to about ten cells.
const STEEPNESS_RATIO: f64 = 0.1;

/// The steepest drop must exceed the drops at the outer edge of the
/// sampling stencil by this factor, which separates a layer from a steep
/// smooth slope.
const CONTRAST: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockRecord {
    pub t: f64,
    /// Interface coordinate in `[0, 1)`.
    pub position: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub jump: f64,
    pub speed_fit: Option<f64>,
    pub offset: usize,
    /// Left cell of the steepest interface.
    pub cell: usize,
}

/// `0.25 * oscillation(u0)`.
pub fn default_threshold(u0: &StateField) -> f64 {
    0.25 * u0.oscillation()
}

/// Finds decreasing jumps.
///
/// A candidate is an interface `k + 1/2` where `d_k = u_k - u_{k+1}` is a
/// local maximum. The one-sided states are the largest of `u_{k-3}`,
/// `u_{k-4}`, `u_{k-5}` and the smallest of `u_{k+4}`, `u_{k+5}`, `u_{k+6}`,
/// which finds the edge of a layer smeared over a few cells. The
/// candidate is a shock when their difference exceeds `threshold`, `d_k`
/// carries at least a tenth of it, and `d_k` is at least twice `d_{k-5}` and
/// `d_{k+5}`. The position is the centroid of the drop over `k ± 3`.
pub fn detect_shocks(field: &StateField, threshold: f64) -> Vec<ShockRecord> {
    let u = field.values();
    let n = u.len();
    let grid = field.grid();
    let h = grid.h();
    let off = ONE_SIDED_OFFSET;
    if n < 2 * (off + EDGE_WINDOW) + 2 {
        return Vec::new();
    }
    let d: Vec<f64> = (0..n).map(|k| u[k] - u[(k + 1) % n]).collect();
    let at = |k: usize, o: isize| grid.neighbor(k, o);

    let mut found: Vec<ShockRecord> = Vec::new();
    for k in 0..n {
        let dk = d[k];
        if dk <= 0.0 || dk <= d[at(k, -1)] || dk < d[at(k, 1)] {
            continue;
        }
        let u_minus = (0..EDGE_WINDOW)
            .map(|j| u[at(k, -((off + j) as isize))])
            .fold(f64::NEG_INFINITY, f64::max);
        let u_plus = (0..EDGE_WINDOW)
            .map(|j| u[at(k, (off + 1 + j) as isize)])
            .fold(f64::INFINITY, f64::min);
        let jump = u_minus - u_plus;
        if jump <= threshold || dk < STEEPNESS_RATIO * jump {
            continue;
        }
        let reach = (off + EDGE_WINDOW - 1) as isize;
        let outside = d[at(k, -reach)].max(d[at(k, reach)]);
        if dk < CONTRAST * outside {
            continue;
        }
        let (mut weight, mut moment) = (0.0, 0.0);
        for o in -(off as isize)..=(off as isize) {
            let w = d[at(k, o)].max(0.0);
            weight += w;
            moment += w * o as f64;
        }
        let shift = if weight > 0.0 { moment / weight } else { 0.0 };
        let position = ((k as f64 + 0.5 + shift) * h).rem_euclid(1.0);
        found.push(ShockRecord {
            t: field.time(),
            position,
            u_minus,
            u_plus,
            jump,
            speed_fit: None,
            offset: off,
            cell: k,
        });
    }

    // Two maxima inside one smeared layer describe the same shock.
    found.sort_by(|a, b| b.jump.total_cmp(&a.jump));
    let mut kept: Vec<ShockRecord> = Vec::new();
    for r in found {
        let close = kept.iter().any(|s| {
            let gap = (s.cell as isize - r.cell as isize).unsigned_abs();
            gap.min(n - gap) <= 2 * off
        });
        if !close {
            kept.push(r);
        }
    }
    kept.sort_by(|a, b| a.position.total_cmp(&b.position));
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackEnd {
    /// Another track claimed the same shock.
    Merged,
    /// No shock near the predicted position.
    Lost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockTrack {
    pub records: Vec<ShockRecord>,
    /// Time and reason when the track stopped before the last snapshot.
    pub closed: Option<(f64, TrackEnd)>,
}

impl ShockTrack {
    /// Positions unwrapped across the periodic boundary.
    pub fn unwrapped_positions(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(self.records.len());
        for r in &self.records {
            let p = match out.last() {
                Some(&prev) => prev + periodic_delta(prev, r.position),
                None => r.position,
            };
            out.push(p);
        }
        out
    }

    pub fn duration(&self) -> f64 {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockTracks {
    pub tracks: Vec<ShockTrack>,
    /// `(t, number of shocks detected)` per snapshot.
    pub counts: Vec<(f64, usize)>,
    /// `(t, number of open tracks)` per snapshot.
    pub open_counts: Vec<(f64, usize)>,
    pub threshold: f64,
    pub window: usize,
}

impl ShockTracks {
    /// The track with the most records.
    pub fn longest(&self) -> Option<&ShockTrack> {
        self.tracks.iter().max_by_key(|t| t.records.len())
    }

    pub fn merges(&self) -> usize {
        self.tracks
            .iter()
            .filter(|t| matches!(t.closed, Some((_, TrackEnd::Merged))))
            .count()
    }

    /// Whether the number of open tracks ever drops between snapshots.
    pub fn count_decreases(&self) -> bool {
        self.open_counts.windows(2).any(|w| w[1].1 < w[0].1)
    }

    /// Largest number of tracks open at once.
    pub fn max_open(&self) -> usize {
        self.open_counts.iter().map(|c| c.1).max().unwrap_or(0)
    }
}

/// Time and record of the first snapshot with a detected shock.
pub fn first_detection(traj: &Trajectory, threshold: f64) -> Option<ShockRecord> {
    traj.snapshots
        .iter()
        .find_map(|s| detect_shocks(s, threshold).into_iter().max_by(|a, b| a.jump.total_cmp(&b.jump)))
}

/// Signed shortest displacement from `a` to `b` on the unit circle.
fn periodic_delta(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(1.0);
    if d > 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// Detects shocks in every snapshot and links them into tracks.
///
/// Open tracks are moved forward with their Rankine-Hugoniot speed
/// `(u⁻ + u⁺)/2` and claim the nearest detection within a few cells plus
/// half the distance a characteristic can travel. A track may miss
/// [`MAX_MISSED`] snapshots; after that it is closed, as merged when another
/// track continues next to its predicted position and as lost otherwise.
/// Speeds are least-squares slopes over the trailing `window` records.
pub fn track_shock(
    traj: &Trajectory,
    threshold: f64,
    window: usize,
) -> Result<ShockTracks, DiagnosticsError> {
    if window < SPEED_WINDOW {
        return Err(DiagnosticsError::WindowTooSmall(window));
    }
    let mut tracks: Vec<ShockTrack> = Vec::new();
    // (track index, missed snapshots)
    let mut open: Vec<(usize, usize)> = Vec::new();
    let mut counts = Vec::with_capacity(traj.snapshots.len());
    let mut open_counts = Vec::with_capacity(traj.snapshots.len());

    for snap in &traj.snapshots {
        let t = snap.time();
        let found = detect_shocks(snap, threshold);
        counts.push((t, found.len()));
        let h = snap.grid().h();
        let sup = snap.sup_norm();
        // (predicted position, gate) per open slot
        let predicted: Vec<(f64, f64)> = open
            .iter()
            .map(|&(ti, _)| {
                let last = tracks[ti].records.last().expect("open tracks are non-empty");
                let dt = t - last.t;
                let pos = (last.position + 0.5 * (last.u_minus + last.u_plus) * dt).rem_euclid(1.0);
                (pos, 4.0 * h + 0.5 * sup * dt)
            })
            .collect();

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (slot, &(pos, gate)) in predicted.iter().enumerate() {
            for (ri, r) in found.iter().enumerate() {
                let dist = periodic_delta(pos, r.position).abs();
                if dist <= gate {
                    pairs.push((dist, slot, ri));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut slot_done = vec![false; open.len()];
        let mut record_owner: Vec<Option<usize>> = vec![None; found.len()];
        for &(_, slot, ri) in &pairs {
            if slot_done[slot] || record_owner[ri].is_some() {
                continue;
            }
            slot_done[slot] = true;
            record_owner[ri] = Some(open[slot].0);
        }

        let mut still_open = Vec::with_capacity(open.len());
        for (slot, &(ti, missed)) in open.iter().enumerate() {
            if slot_done[slot] {
                still_open.push((ti, 0));
                continue;
            }
            if missed < MAX_MISSED {
                still_open.push((ti, missed + 1));
                continue;
            }
            let (pos, gate) = predicted[slot];
            let merged = found.iter().zip(&record_owner).any(|(r, owner)| {
                owner.is_some_and(|o| o != ti) && periodic_delta(pos, r.position).abs() <= gate
            });
            let reason = if merged { TrackEnd::Merged } else { TrackEnd::Lost };
            tracks[ti].closed = Some((t, reason));
        }
        for (ri, owner) in record_owner.iter().enumerate() {
            match owner {
                Some(ti) => tracks[*ti].records.push(found[ri]),
                None => {
                    tracks.push(ShockTrack {
                        records: vec![found[ri]],
                        closed: None,
                    });
                    still_open.push((tracks.len() - 1, 0));
                }
            }
        }
        open = still_open;
        open_counts.push((t, open.len()));
    }

    for track in &mut tracks {
        let xs = track.unwrapped_positions();
        for i in (window - 1)..track.records.len() {
            let lo = i + 1 - window;
            let ts: Vec<f64> = track.records[lo..=i].iter().map(|r| r.t).collect();
            track.records[i].speed_fit = least_squares_slope(&ts, &xs[lo..=i]);
        }
    }
    Ok(ShockTracks {
        tracks,
        counts,
        open_counts,
        threshold,
        window,
    })
}

fn least_squares_slope(t: &[f64], x: &[f64]) -> Option<f64> {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let xm = x.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (ti, xi) in t.iter().zip(x) {
        num += (ti - tm) * (xi - xm);
        den += (ti - tm) * (ti - tm);
    }
    (den > 0.0).then(|| num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankineHugoniot {
    /// `|speed_fit - mean((u⁻ + u⁺)/2)|` per fitted record.
    pub defects: Vec<f64>,
    pub max_defect: f64,
    pub mean_defect: f64,
}

/// Compares fitted speeds with the Rankine-Hugoniot speed `(u⁻ + u⁺)/2`
/// averaged over the same window.
pub fn rankine_hugoniot(track: &ShockTrack, window: usize) -> Result<RankineHugoniot, DiagnosticsError> {
    if window < SPEED_WINDOW {
        return Err(DiagnosticsError::WindowTooSmall(window));
    }
    if track.records.len() < window {
        return Err(DiagnosticsError::TrackTooShort {
            len: track.records.len(),
            needed: window,
        });
    }
    let defects: Vec<f64> = (window - 1..track.records.len())
        .filter_map(|i| {
            let fit = track.records[i].speed_fit?;
            let rec = &track.records[i + 1 - window..=i];
            let rh = rec.iter().map(|r| 0.5 * (r.u_minus + r.u_plus)).sum::<f64>() / window as f64;
            Some((fit - rh).abs())
        })
        .collect();
    let max_defect = defects.iter().copied().fold(0.0, f64::max);
    let mean_defect = defects.iter().sum::<f64>() / defects.len().max(1) as f64;
    Ok(RankineHugoniot {
        defects,
        max_defect,
        mean_defect,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpMonotonicity {
    /// Fraction of consecutive pairs with a strictly smaller jump.
    pub fraction: f64,
    pub pairs: usize,
    pub skipped: usize,
    pub pass: bool,
}

pub const JUMP_MONOTONE_FRACTION: f64 = 0.95;

/// Share of decreasing jump heights along a track, ignoring the first 10%
/// of the records (formation transient).
pub fn jump_monotonicity(records: &[ShockRecord]) -> Result<JumpMonotonicity, DiagnosticsError> {
    if records.len() < 10 {
        return Err(DiagnosticsError::TrackTooShort {
            len: records.len(),
            needed: 10,
        });
    }
    let skipped = records.len().div_ceil(10);
    let tail = &records[skipped..];
    let pairs = tail.len() - 1;
    let decreasing = tail.windows(2).filter(|w| w[1].jump < w[0].jump).count();
    let fraction = decreasing as f64 / pairs as f64;
    Ok(JumpMonotonicity {
        fraction,
        pairs,
        skipped,
        pass: fraction >= JUMP_MONOTONE_FRACTION,
    })
}
