use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{bisect, CriticalLandscape, LandscapeError, PeriodicPotential};
use crate::circle::{self, Arc};

const WALK_STEPS: usize = 4096;
const CHECK_POINTS: usize = 4096;
const KAPPA_GRID: usize = 32;
const KAPPA_SAFETY: f64 = 0.99;
const DELTA_FLOOR: f64 = 1e-12;

/// Level sets around one minimum `x` of `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumGeometry {
    pub location: f64,
    pub value: f64,
    /// Component of `{F <= F(x) + 2δ}` containing `x`.
    pub interval: Arc,
    /// Points of the interval where `F = F(x) + η`, left then right.
    pub b_points: Vec<f64>,
    /// Component of `{F <= F(x) + 2η}` containing `x`; its complement is
    /// where the process counts as escaped.
    pub escape_arc: Arc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelGeometry {
    pub delta: f64,
    pub eta: f64,
    pub minima: Vec<MinimumGeometry>,
    /// Grid minimum of `d(x, B_x^η') / √η'` before the safety factor.
    pub kappa_raw: f64,
    pub kappa: f64,
}

impl LevelGeometry {
    pub fn a_points(&self) -> Vec<f64> {
        self.minima.iter().map(|m| m.location).collect()
    }

    pub fn b_points(&self) -> Vec<f64> {
        self.minima.iter().flat_map(|m| m.b_points.iter().copied()).collect()
    }

    /// Arcs whose union is the complement of the escape region.
    pub fn complement_arcs(&self) -> Vec<Arc> {
        self.minima.iter().map(|m| m.escape_arc).collect()
    }

    /// Endpoints of the escape arcs; any path into the escape region from
    /// inside an arc crosses one of them.
    pub fn escape_boundary(&self) -> Vec<f64> {
        self.minima
            .iter()
            .flat_map(|m| [m.escape_arc.start, m.escape_arc.end()])
            .collect()
    }

    /// Whether `x` lies in the escape region (strictly outside every arc).
    pub fn in_escape_region(&self, x: f64) -> bool {
        !self.minima.iter().any(|m| m.escape_arc.contains(x))
    }

    /// `min d(A, B^η)`.
    pub fn a_to_b_distance(&self) -> f64 {
        self.minima
            .iter()
            .flat_map(|m| m.b_points.iter().map(move |b| circle::distance(m.location, *b)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks the defining properties on grids, returning one message per
    /// violation.
    pub fn violations(&self, p: &PeriodicPotential, landscape: &CriticalLandscape) -> Vec<String> {
        let mut out = Vec::new();
        let tol = 1e-9;
        for m in &self.minima {
            let top = m.value + 2.0 * self.delta;
            for z in [m.interval.start, m.interval.end()] {
                if (p.value(z) - top).abs() > tol {
                    out.push(format!("interval endpoint {z} not at level {top}"));
                }
            }
            if !monotone_sides(p, m.location, &m.interval) {
                out.push(format!("F not monotone on both sides of {}", m.location));
            }
            for &b in &m.b_points {
                if (p.value(b) - (m.value + self.eta)).abs() > tol {
                    out.push(format!("B point {b} off level"));
                }
                if !m.interval.contains(b) {
                    out.push(format!("B point {b} outside interval"));
                }
            }
        }
        for eta in log_grid(self.delta, 16) {
            for m in &self.minima {
                if let Ok((l, r)) = crossings(p, m.location, m.value + eta) {
                    let d = circle::distance(m.location, l).min(circle::distance(m.location, r));
                    if d < self.kappa * eta.sqrt() - 1e-12 {
                        out.push(format!("d(x, B^{eta}) = {d} below kappa sqrt(eta)"));
                    }
                }
            }
        }
        if landscape.is_ergodic() {
            for i in 0..CHECK_POINTS {
                let x = TAU * i as f64 / CHECK_POINTS as f64;
                // C^δ must contain {F >= -δ} (checked here with the δ arcs).
                let inside = self.minima.iter().any(|m| {
                    let arc = component(p, m.location, m.value + 2.0 * self.delta).ok();
                    arc.is_some_and(|a| a.contains(x) && ccw_interior(&a, x))
                });
                if inside && p.value(x) > -self.delta + tol {
                    out.push(format!("{{F >= -delta}} point {x} inside a minimum's neighbourhood"));
                    break;
                }
            }
        }
        if !(self.kappa > 0.0) {
            out.push("kappa not positive".into());
        }
        out
    }
}

fn ccw_interior(a: &Arc, x: f64) -> bool {
    let s = circle::ccw(a.start, x);
    s > 1e-12 && s < a.length - 1e-12
}

fn log_grid(top: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| top * 10f64.powf(-6.0 * i as f64 / (n - 1) as f64))
}

/// Walks from `x` in direction `dir` to the first crossing of `level`.
fn walk_to_level(p: &PeriodicPotential, x: f64, level: f64, dir: f64) -> Option<f64> {
    let h = TAU / WALK_STEPS as f64;
    let g = |z: f64| p.value(z) - level;
    let mut prev = x;
    for i in 1..=WALK_STEPS {
        let z = x + dir * h * i as f64;
        if g(z) > 0.0 {
            let gp = g(prev);
            return Some(if gp == 0.0 { prev } else { bisect(&g, prev, z, gp) });
        }
        prev = z;
    }
    None
}

/// Left and right crossings of `level` around `x` (unwrapped about `x`).
fn crossings(p: &PeriodicPotential, x: f64, level: f64) -> Result<(f64, f64), LandscapeError> {
    let err = || LandscapeError::ComponentIsCircle { location: x, level };
    let l = walk_to_level(p, x, level, -1.0).ok_or_else(err)?;
    let r = walk_to_level(p, x, level, 1.0).ok_or_else(err)?;
    if r - l >= TAU {
        return Err(err());
    }
    Ok((l, r))
}

fn component(p: &PeriodicPotential, x: f64, level: f64) -> Result<Arc, LandscapeError> {
    let (l, r) = crossings(p, x, level)?;
    Ok(Arc::new(l, r - l))
}

/// `F` decreasing from the left end to `x` and increasing from `x` to the
/// right end, on a grid.
fn monotone_sides(p: &PeriodicPotential, x: f64, arc: &Arc) -> bool {
    let left = circle::ccw(arc.start, x);
    let right = arc.length - left;
    let check = |from: f64, len: f64, dir: f64| {
        let mut prev = p.value(from);
        (1..=CHECK_POINTS).all(|i| {
            let v = p.value(from + dir * len * i as f64 / CHECK_POINTS as f64);
            let ok = v <= prev + 1e-13;
            prev = v;
            ok
        })
    };
    // Walk downhill from both ends towards x.
    check(arc.start, left, 1.0) && check(arc.start + arc.length, right, -1.0)
}

fn bullets_hold(p: &PeriodicPotential, l: &CriticalLandscape, delta: f64) -> bool {
    l.minima().iter().all(|&x| {
        let top = p.value(x) + 2.0 * delta;
        match component(p, x, top) {
            Ok(arc) => monotone_sides(p, x, &arc),
            Err(_) => false,
        }
    }) && compute_level_geometry(p, l, delta, delta).is_ok_and(|g| g.kappa > 0.0)
}

/// Largest δ on a dyadic ladder that satisfies the cap
/// `δ <= -(1/3) max{F(x) : x local min, F(x) < 0}` and the two
/// sublevel-set conditions.
///
/// The ladder starts at the cap, or at `(max F - min F) / 4` when there is
/// no negative minimum.
pub fn compute_delta(p: &PeriodicPotential, l: &CriticalLandscape) -> Result<f64, LandscapeError> {
    let neg_min_values: Vec<f64> = l.min_negative.iter().map(|&x| p.value(x)).collect();
    let mut delta = if neg_min_values.is_empty() {
        (p.max_value() - p.min_value()) / 4.0
    } else {
        -neg_min_values.iter().copied().fold(f64::NEG_INFINITY, f64::max) / 3.0
    };
    while delta > DELTA_FLOOR {
        if bullets_hold(p, l, delta) {
            return Ok(delta);
        }
        delta *= 0.5;
    }
    Err(LandscapeError::NoValidDelta)
}

/// Builds the level sets for the given δ and η, and the constant κ from a
/// grid of 32 log-spaced levels in `(0, δ]`.
pub fn compute_level_geometry(
    p: &PeriodicPotential,
    l: &CriticalLandscape,
    delta: f64,
    eta: f64,
) -> Result<LevelGeometry, LandscapeError> {
    if !(eta > 0.0 && eta <= delta) {
        return Err(LandscapeError::InvalidEta { eta, delta });
    }
    let mut minima = Vec::new();
    let mut kappa_raw = f64::INFINITY;
    for x in l.minima() {
        let value = p.value(x);
        let interval = component(p, x, value + 2.0 * delta)?;
        let (bl, br) = crossings(p, x, value + eta)?;
        let escape_arc = component(p, x, value + 2.0 * eta)?;
        for level in log_grid(delta, KAPPA_GRID) {
            let (ll, rr) = crossings(p, x, value + level)?;
            let d = (x - ll).min(rr - x);
            kappa_raw = kappa_raw.min(d / level.sqrt());
        }
        minima.push(MinimumGeometry {
            location: x,
            value,
            interval,
            b_points: vec![circle::wrap(bl), circle::wrap(br)],
            escape_arc,
        });
    }
    Ok(LevelGeometry {
        delta,
        eta,
        minima,
        kappa_raw,
        kappa: KAPPA_SAFETY * kappa_raw,
    })
}
