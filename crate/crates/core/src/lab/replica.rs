use rayon::prelude::*;

use super::files::{events_csv, trajectory_csv};
use crate::circle::wrap;
use crate::diffusion::{evolve, step_count, DiffusionState};
use crate::landscape::PeriodicPotential;
use crate::pdmp::{segment_u, PdmpModel, PdmpState, Segment, DEFAULT_MAX_EVENTS};
use crate::seeding::SimRng;
use crate::stats::{HistogramAccumulator, HistogramSpec, PathPoint};

const CHUNK: u64 = 256;

/// Maps `f` over `0..n` in parallel and folds the results in index order,
/// a chunk at a time so that per-replica outputs never pile up.
pub(crate) fn fold_replicas<T, A, F, G>(n: u64, f: F, init: A, mut fold: G) -> A
where
    T: Send,
    F: Fn(u64) -> T + Sync,
    G: FnMut(A, u64, T) -> A,
{
    let mut acc = init;
    let mut lo = 0;
    while lo < n {
        let hi = (lo + CHUNK).min(n);
        let batch: Vec<T> = (lo..hi).into_par_iter().map(&f).collect();
        for (i, t) in (lo..hi).zip(batch) {
            acc = fold(acc, i, t);
        }
        lo = hi;
    }
    acc
}

#[derive(Clone, Copy)]
pub(crate) enum Dynamics<'a> {
    Diffusion { dt: f64, record_every: u64 },
    Pdmp { model: &'a PdmpModel<'a> },
}

impl Dynamics<'_> {
    /// Saved-path file for replica `i`.
    pub fn path_file(&self, i: u64) -> String {
        match self {
            Dynamics::Diffusion { .. } => format!("trajectory_{i}.csv"),
            Dynamics::Pdmp { .. } => format!("events_{i}.csv"),
        }
    }
}

/// What to collect along one path.
pub(crate) struct PathJob<'a> {
    pub p: &'a PeriodicPotential,
    pub horizon: f64,
    /// Sorted times at which the state is reported.
    pub grid: &'a [f64],
    pub spec: HistogramSpec,
    /// One occupation accumulator per `[from, to]` window.
    pub windows: &'a [(f64, f64)],
    pub save: bool,
}

pub(crate) struct PathResult {
    pub samples: Vec<PathPoint>,
    pub occupation: Vec<HistogramAccumulator>,
    pub terminal: PathPoint,
    pub saved: Option<String>,
}

/// One replica from `z0 = (x, u, y)`; `y` is ignored by the diffusion.
pub(crate) fn run_path(
    dyn_: Dynamics<'_>,
    job: &PathJob<'_>,
    z0: (f64, f64, f64),
    rng: &mut SimRng,
) -> Result<PathResult, String> {
    let mut occ: Vec<HistogramAccumulator> = job
        .windows
        .iter()
        .map(|_| HistogramAccumulator::new(job.spec))
        .collect();
    let mut samples = Vec::with_capacity(job.grid.len());
    let mut next = 0;
    match dyn_ {
        Dynamics::Diffusion { dt, record_every } => {
            let steps = step_count(job.horizon, dt);
            let grid_steps: Vec<u64> = job.grid.iter().map(|&g| (g / dt).round() as u64).collect();
            let mut rows = Vec::new();
            let end = evolve(job.p, DiffusionState::new(z0.0, z0.1), dt, steps, rng, |i, s| {
                let t = i as f64 * dt;
                while next < grid_steps.len() && grid_steps[next] <= i {
                    samples.push((t, s.x, s.u));
                    next += 1;
                }
                if i % record_every == 0 {
                    for (acc, &(from, to)) in occ.iter_mut().zip(job.windows) {
                        if t >= from && t <= to {
                            acc.add(s.x, s.u, 1.0, 1.0);
                        }
                    }
                    if job.save {
                        rows.push((t, s.x, s.u));
                    }
                }
            });
            if !(end.x.is_finite() && end.u.is_finite()) {
                return Err(format!("non-finite state ({}, {})", end.x, end.u));
            }
            let t_end = steps as f64 * dt;
            if job.save && !steps.is_multiple_of(record_every) {
                rows.push((t_end, end.x, end.u));
            }
            Ok(PathResult {
                samples,
                occupation: occ,
                terminal: (t_end, end.x, end.u),
                saved: job.save.then(|| trajectory_csv(&rows)),
            })
        }
        Dynamics::Pdmp { model } => {
            let p = job.p;
            let start = PdmpState::new(z0.0, z0.1, z0.2);
            let mut segs: Vec<Segment> = Vec::new();
            let end = model
                .run(start, job.horizon, rng, DEFAULT_MAX_EVENTS, |seg| {
                    let t1 = seg.t0 + seg.duration;
                    while next < job.grid.len() && (job.grid[next] <= t1) {
                        let r = (job.grid[next] - seg.t0).max(0.0);
                        samples.push((
                            job.grid[next],
                            wrap(seg.x0 + seg.y * r),
                            segment_u(p, seg.x0, seg.y, r, seg.u0),
                        ));
                        next += 1;
                    }
                    for (acc, &(from, to)) in occ.iter_mut().zip(job.windows) {
                        acc.add_segment(p, seg, from - seg.t0, to - seg.t0);
                    }
                    if job.save {
                        segs.push(*seg);
                    }
                })
                .map_err(|e| e.to_string())?;
            Ok(PathResult {
                samples,
                occupation: occ,
                terminal: (job.horizon, end.x, end.u),
                saved: job.save.then(|| events_csv(p, start, &segs)),
            })
        }
    }
}
