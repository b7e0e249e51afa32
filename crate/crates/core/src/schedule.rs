//! Piecewise-constant controls on `[0, t]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::landscape::{LandscapeError, PeriodicPotential};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("target u = {u1} outside the reachable interval ({lo}, {hi})")]
    Unreachable { u1: f64, lo: f64, hi: f64 },
    #[error("no plan of this shape fits: {0}")]
    PlanInfeasible(String),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
}

/// Endpoints of the open interval of `u(t)` reachable from `u0`:
/// `u0 + t min F` and `u0 + t max F`.
pub fn reachable_interval(p: &PeriodicPotential, u0: f64, t: f64) -> (f64, f64) {
    (u0 + p.min_value() * t, u0 + p.max_value() * t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    /// `breakpoints[0] = 0`, last entry is the horizon.
    pub breakpoints: Vec<f64>,
    /// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`.
    pub values: Vec<f64>,
}

impl ControlSchedule {
    pub fn constant(value: f64, horizon: f64) -> Self {
        Self {
            breakpoints: vec![0.0, horizon],
            values: vec![value],
        }
    }

    /// Builds a schedule from `(duration, value)` pieces, dropping empty
    /// pieces and merging equal neighbours.
    pub fn from_pieces(pieces: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut breakpoints = vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        let mut t = 0.0;
        for (len, v) in pieces {
            if len <= 0.0 {
                continue;
            }
            t += len;
            if values.last() == Some(&v) {
                *breakpoints.last_mut().unwrap() = t;
            } else {
                values.push(v);
                breakpoints.push(t);
            }
        }
        Self { breakpoints, values }
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap_or(&0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(duration, value)` pieces.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[1] - w[0], v))
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1);
        self.values[i.min(self.values.len() - 1)]
    }
}
