use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moments::moment_row;
use crate::seeding::{derive_replica_seed, replica_rng, SimRng};

const CONTRACTION: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub u0: f64,
    /// Monte Carlo `E exp(κ |U_t|)`.
    pub estimate: f64,
    pub std_error: f64,
    /// `estimate / exp(κ |u0|)`.
    pub ratio: f64,
    pub ratio_se: f64,
    pub heavy_tail: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftScan {
    pub t: f64,
    pub rows: Vec<DriftRow>,
    /// Smallest `C` with `estimate <= exp(κ|u0|)/2 + C` on every row.
    pub c_t: f64,
    /// Ratio at the largest `|u0|` is at most 3/4.
    pub contraction_ok: bool,
    /// Ratios do not increase with `|u0|` beyond two standard errors.
    pub monotone_ok: bool,
}

impl DriftScan {
    pub fn passed(&self) -> bool {
        self.contraction_ok && self.monotone_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub kappa: f64,
    pub scans: Vec<DriftScan>,
    /// First scanned `t` that passed.
    pub t_used: Option<f64>,
    pub warning: Option<String>,
}

impl DriftReport {
    pub fn passed(&self) -> bool {
        self.t_used.is_some()
    }
}

/// Estimates `E exp(κ |U_t|)` from each `u0` and checks the contraction
/// `ratio <= 3/4` at the largest `|u0|`, scanning `ts` in order and
/// stopping at the first `t` that passes.
///
/// `sim(u0, t, rng)` returns one draw of `U_t`. The stream for replica `i`
/// of the `k`-th `(t, u0)` cell is `replica_rng(derive_replica_seed(root, k), i)`.
pub fn lyapunov_drift_check<S>(
    kappa: f64,
    ts: &[f64],
    u0s: &[f64],
    reps: u64,
    root_seed: u64,
    ergodic: bool,
    sim: S,
) -> DriftReport
where
    S: Fn(f64, f64, &mut SimRng) -> f64 + Sync,
{
    let mut order: Vec<f64> = u0s.to_vec();
    order.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mut scans = Vec::new();
    let mut t_used = None;
    for (ti, &t) in ts.iter().enumerate() {
        let rows: Vec<DriftRow> = order
            .iter()
            .enumerate()
            .map(|(j, &u0)| {
                let cell = derive_replica_seed(root_seed, (ti * order.len() + j) as u64);
                let draws: Vec<f64> = (0..reps)
                    .into_par_iter()
                    .map(|i| sim(u0, t, &mut replica_rng(cell, i)).abs())
                    .collect();
                let m = moment_row(&draws, kappa);
                let scale = (kappa * u0.abs()).exp();
                DriftRow {
                    u0,
                    estimate: m.estimate,
                    std_error: m.std_error,
                    ratio: m.estimate / scale,
                    ratio_se: m.std_error / scale,
                    heavy_tail: m.heavy_tail,
                }
            })
            .collect();
        let c_t = rows
            .iter()
            .map(|r| r.estimate - 0.5 * (kappa * r.u0.abs()).exp())
            .fold(0.0, f64::max);
        let contraction_ok = rows.last().is_some_and(|r| r.ratio <= CONTRACTION);
        let monotone_ok = rows
            .windows(2)
            .all(|w| w[1].ratio <= w[0].ratio + 2.0 * w[0].ratio_se.hypot(w[1].ratio_se));
        let scan = DriftScan {
            t,
            rows,
            c_t,
            contraction_ok,
            monotone_ok,
        };
        let passed = scan.passed();
        scans.push(scan);
        if passed {
            t_used = Some(t);
            break;
        }
    }
    DriftReport {
        kappa,
        scans,
        t_used,
        warning: (!ergodic).then(|| "the potential has traps; no contraction is expected".to_string()),
    }
}
