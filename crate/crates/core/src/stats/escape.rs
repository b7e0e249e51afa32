use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::hitting::hitting_time;
use crate::circle::Arc;
use crate::landscape::LevelGeometry;
use crate::path::PathWalker;
use crate::seeding::{replica_rng, SimRng};

/// Wilson score interval.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `8π M ‖F'‖_∞ exp(-2 M η)`.
pub fn diffusion_escape_bound(m: f64, slope_sup: f64, eta: f64) -> f64 {
    8.0 * PI * m * slope_sup * (-2.0 * m * eta).exp()
}

/// `exp(2λπ) exp(-η M)`.
pub fn pdmp_escape_bound(lambda: f64, eta: f64, m: f64) -> f64 {
    (2.0 * lambda * PI).exp() * (-eta * m).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeEstimate {
    pub successes: u64,
    pub trials: u64,
    /// Trials that reached neither set before the cap.
    pub censored: u64,
    pub estimate: f64,
    pub interval: (f64, f64),
    pub bound: Option<f64>,
    pub warning: Option<String>,
}

impl EscapeEstimate {
    pub fn from_counts(successes: u64, trials: u64, bound: Option<f64>) -> Self {
        let estimate = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        Self {
            successes,
            trials,
            censored: 0,
            estimate,
            interval: wilson_interval(successes, trials, 1.96),
            bound,
            warning: None,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.interval.1 - self.interval.0)
    }

    /// `estimate <= bound + k half-widths` (true when there is no bound).
    pub fn within_bound(&self, k: f64) -> bool {
        self.bound.is_none_or(|b| self.estimate <= b + k * self.half_width())
    }

    /// Whether the two intervals overlap.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.interval.0 <= other.interval.1 && other.interval.0 <= self.interval.1
    }
}

/// Fraction of driven runs that, started from a point of `B^η`, reach the
/// escape region `C^η` before the minimum they started next to.
///
/// Replica `i` starts from the `i mod |B|`-th point of `B^η` and uses the
/// stream `replica_rng(root_seed, i)`; `make` builds the walker (driven at
/// level `m`) from the start point and that stream. Runs reaching neither
/// set within `cap` count as failures and are reported as censored.
#[allow(clippy::too_many_arguments)]
pub fn estimate_escape<W, F>(
    geometry: &LevelGeometry,
    m: f64,
    reps: u64,
    root_seed: u64,
    cap: f64,
    bound: Option<f64>,
    make: F,
) -> EscapeEstimate
where
    W: PathWalker,
    F: Fn(f64, &mut SimRng) -> W + Sync,
{
    let starts: Vec<(f64, Arc, Arc)> = geometry
        .minima
        .iter()
        .flat_map(|mg| {
            mg.b_points
                .iter()
                .map(move |&b| (b, Arc::point(mg.location), mg.escape_arc))
        })
        .collect();
    let outcomes: Vec<(bool, bool)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let (b, home, arc) = starts[(i % starts.len() as u64) as usize];
            let mut rng = replica_rng(root_seed, i);
            let mut w = make(b, &mut rng);
            let targets = [home, Arc::point(arc.start), Arc::point(arc.end())];
            let hit = hitting_time(&mut w, &mut rng, &targets, cap);
            (hit.target.is_some_and(|k| k > 0), hit.censored)
        })
        .collect();
    let successes = outcomes.iter().filter(|o| o.0).count() as u64;
    let mut est = EscapeEstimate::from_counts(successes, reps, bound);
    est.censored = outcomes.iter().filter(|o| o.1).count() as u64;
    if m * geometry.eta <= 1.0 {
        est.warning = Some(format!(
            "M η = {} <= 1: the bound is not claimed here",
            m * geometry.eta
        ));
    }
    est
}
