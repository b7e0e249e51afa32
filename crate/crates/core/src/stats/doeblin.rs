use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EscapeEstimate, StatsError};
use crate::circle::Arc;
use crate::seeding::{derive_replica_seed, replica_rng, SimRng};

/// `arc × [u_lo, u_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateBox {
    pub arc: Arc,
    pub u_lo: f64,
    pub u_hi: f64,
}

impl StateBox {
    pub fn contains(&self, x: f64, u: f64) -> bool {
        self.arc.contains(x) && (self.u_lo..=self.u_hi).contains(&u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoeblinReport {
    pub per_start: Vec<EscapeEstimate>,
    pub min_index: usize,
    pub min_estimate: f64,
    pub min_interval: (f64, f64),
}

/// For each start `(x, u)`, the fraction of `reps` runs with
/// `sim(start, rng)` (the state at the probe time) inside `target`.
/// Start `k` uses the streams `replica_rng(derive_replica_seed(root, k), i)`.
pub fn doeblin_probe<S>(
    starts: &[(f64, f64)],
    target: &StateBox,
    reps: u64,
    root_seed: u64,
    sim: S,
) -> Result<DoeblinReport, StatsError>
where
    S: Fn((f64, f64), &mut SimRng) -> (f64, f64) + Sync,
{
    if starts.is_empty() || !(target.arc.length > 0.0 && target.u_hi > target.u_lo) {
        return Err(StatsError::Empty);
    }
    let per_start: Vec<EscapeEstimate> = starts
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            let cell = derive_replica_seed(root_seed, k as u64);
            let inside = (0..reps)
                .into_par_iter()
                .filter(|&i| {
                    let (x, u) = sim(z, &mut replica_rng(cell, i));
                    target.contains(x, u)
                })
                .count() as u64;
            EscapeEstimate::from_counts(inside, reps, None)
        })
        .collect();
    let (min_index, worst) = per_start
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.estimate.total_cmp(&b.1.estimate))
        .expect("non-empty");
    Ok(DoeblinReport {
        min_index,
        min_estimate: worst.estimate,
        min_interval: worst.interval,
        per_start,
    })
}
