//! Exit probabilities of `dX = dB - M F'(X) dt` from an arc, through its
//! scale function.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::circle::ccw;
use crate::landscape::{LandscapeError, PeriodicPotential};
use crate::quad::adaptive_simpson;

const REL_TOL: f64 = 1e-10;
const MONOTONE_GRID: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitProbability {
    /// `(p(x1) - p(x)) / (p(x1) - p(x0))` with `p(x) = 0`: the chance of
    /// leaving through `x0`.
    pub reach_near_first: f64,
    /// The complement, the chance of leaving through `x1`.
    pub reach_far_first: f64,
}

/// For the diffusion started at `x` inside the arc from `x0` to `x1`,
/// computes the scale function
/// `p(y) = ∫_x^y exp(2M (F(z) - F(x))) dz` and the exit ratios.
///
/// The arc is the one with endpoints `x0`, `x1` that contains `x`; `F` must
/// be monotone on it.
pub fn analytic_escape_probability(
    p: &PeriodicPotential,
    m: f64,
    x0: f64,
    x: f64,
    x1: f64,
) -> Result<ExitProbability, LandscapeError> {
    // Unwrap both endpoints around x, on opposite sides. When x is an
    // endpoint either arc contains it; take the shorter one.
    let l = ccw(x0, x1);
    let on_ccw = ccw(x0, x) <= l;
    let on_cw = ccw(x1, x) <= TAU - l;
    let forward = if on_ccw && on_cw { l <= TAU - l } else { on_ccw };
    let (a, b) = if forward {
        (x - ccw(x0, x), x + ccw(x, x1))
    } else {
        (x + ccw(x, x0), x - ccw(x1, x))
    };
    check_monotone(p, a, b)?;
    let fx = p.value(x);
    let density = |z: f64| (2.0 * m * (p.value(z) - fx)).exp();
    let pa = adaptive_simpson(density, x, a, REL_TOL);
    let pb = adaptive_simpson(density, x, b, REL_TOL);
    let near = if pb == pa { 0.5 } else { pb / (pb - pa) };
    Ok(ExitProbability {
        reach_near_first: near,
        reach_far_first: 1.0 - near,
    })
}

fn check_monotone(p: &PeriodicPotential, a: f64, b: f64) -> Result<(), LandscapeError> {
    let vals: Vec<f64> = (0..=MONOTONE_GRID)
        .map(|i| p.value(a + (b - a) * i as f64 / MONOTONE_GRID as f64))
        .collect();
    let slack = 1e-13;
    let up = vals.windows(2).all(|w| w[1] >= w[0] - slack);
    let down = vals.windows(2).all(|w| w[1] <= w[0] + slack);
    if up || down {
        Ok(())
    } else {
        Err(LandscapeError::NotMonotone { from: a, to: b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn boundaries() {
        let p = PeriodicPotential::cosine();
        let (x0, x1) = (PI, PI - 1.2);
        let r = analytic_escape_probability(&p, 8.0, x0, x1, x1).unwrap();
        assert!(r.reach_near_first.abs() < 1e-12);
        let r = analytic_escape_probability(&p, 8.0, x0, x0, x1).unwrap();
        assert!((r.reach_near_first - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_drift_is_linear() {
        let p = PeriodicPotential::cosine();
        for &(x0, x, x1) in &[(PI, 2.5, 1.5), (PI, 3.5, 4.6), (0.3, 1.0, 2.0)] {
            let r = analytic_escape_probability(&p, 0.0, x0, x, x1).unwrap();
            let total = crate::circle::distance(x0, x1);
            let expected = crate::circle::distance(x, x1) / total;
            assert!((r.reach_near_first - expected).abs() < 1e-10, "{r:?} {expected}");
        }
    }

    #[test]
    fn orientation_is_symmetric() {
        // Mirror image around π for cos: same probabilities.
        let p = PeriodicPotential::cosine();
        let a = analytic_escape_probability(&p, 4.0, PI, PI - 0.5, PI - 1.0).unwrap();
        let b = analytic_escape_probability(&p, 4.0, PI, PI + 0.5, PI + 1.0).unwrap();
        assert!((a.reach_near_first - b.reach_near_first).abs() < 1e-10);
    }

    #[test]
    fn drift_pushes_towards_minimum() {
        let p = PeriodicPotential::cosine();
        let r = analytic_escape_probability(&p, 10.0, PI, PI - 0.84, PI - 1.9).unwrap();
        assert!(r.reach_far_first < 1e-3);
        assert!((r.reach_near_first + r.reach_far_first - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_monotone_arc() {
        let p = PeriodicPotential::cosine();
        assert!(analytic_escape_probability(&p, 1.0, PI - 1.0, PI, PI + 1.0).is_err());
    }
}
