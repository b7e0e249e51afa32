//! A common view of sample paths as a sequence of straight sweeps, used by
//! the hitting-time estimators.

use crate::seeding::SimRng;

/// The position moved from `x0` by `displacement` (unwrapped) over
/// `[t0, t0 + duration]`. When `exact`, the motion is linear in time, so
/// crossing times inside the sweep are exact; otherwise only the endpoints
/// are samples of the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub t0: f64,
    pub x0: f64,
    pub displacement: f64,
    pub duration: f64,
    pub exact: bool,
}

pub trait PathWalker {
    fn time(&self) -> f64;
    fn position(&self) -> f64;
    /// Moves the path forward, never past `limit`.
    fn advance(&mut self, rng: &mut SimRng, limit: f64) -> Sweep;
}
