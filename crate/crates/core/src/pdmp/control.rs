//! Velocity schedules for `x' = y`, `u' = F(x)` with `y ∈ {-1, +1}`.

use serde::{Deserialize, Serialize};

use super::PdmpState;
use crate::circle::{ccw, distance, wrap};
use crate::landscape::{landscape_of, PeriodicPotential};
use crate::schedule::{reachable_interval, ControlError, ControlSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityPlan {
    pub schedule: ControlSchedule,
    pub terminal_velocity: f64,
}

/// Exact `(x, u)` at the end of the schedule.
pub fn integrate_velocity_schedule(p: &PeriodicPotential, x0: f64, u0: f64, schedule: &ControlSchedule) -> (f64, f64) {
    let (mut x, mut u) = (x0, u0);
    for (len, y) in schedule.pieces() {
        u += p.line_integral(x, y, len);
        x = wrap(x + y * len);
    }
    (x, u)
}

/// Travel time and `u` increment from `from` to `to` moving in `dir`.
fn leg(p: &PeriodicPotential, from: f64, to: f64, dir: f64) -> (f64, f64) {
    let len = if dir > 0.0 { ccw(from, to) } else { ccw(to, from) };
    (len, p.line_integral(from, dir, len))
}

/// Stand still on average: alternate `±1` with half-period `1/rate`, the
/// remainder split evenly so the net displacement is zero.
fn dwell(pieces: &mut Vec<(f64, f64)>, w: f64, rate: f64, first: f64) {
    if w <= 0.0 {
        return;
    }
    let tau = 1.0 / rate;
    let pairs = (w * rate / 2.0).floor() as usize;
    for _ in 0..pairs {
        pieces.push((tau, first));
        pieces.push((tau, -first));
    }
    let rest = w - 2.0 * pairs as f64 * tau;
    if rest > 0.0 {
        pieces.push((0.5 * rest, first));
        pieces.push((0.5 * rest, -first));
    }
}

struct Candidate {
    travel: f64,
    waypoints: [f64; 2],
    dirs: [f64; 3],
    dwells: [f64; 2],
}

/// A velocity schedule on `[0, t]` from `z0` to `(x1, u1)`: travel to one
/// global extremum of `F`, oscillate there, travel to the other, oscillate,
/// travel to `x1`. The oscillation at `switch_rate` stands in for a zero
/// velocity, so `u` misses `u1` by an amount that shrinks with the rate;
/// `x` is hit exactly.
pub fn plan_pdmp_velocity_schedule(
    p: &PeriodicPotential,
    z0: PdmpState,
    x1: f64,
    u1: f64,
    t: f64,
    switch_rate: f64,
) -> Result<VelocityPlan, ControlError> {
    let (lo, hi) = reachable_interval(p, z0.u, t);
    if !(u1 > lo && u1 < hi) {
        return Err(ControlError::Unreachable { u1, lo, hi });
    }
    let straight = wrap(z0.x + z0.y * t);
    if distance(straight, x1) < 1e-9 && (z0.u + p.line_integral(z0.x, z0.y, t) - u1).abs() < 1e-9 {
        return Ok(VelocityPlan {
            schedule: ControlSchedule::constant(z0.y, t),
            terminal_velocity: z0.y,
        });
    }
    if !(switch_rate > 0.0) {
        return Err(ControlError::PlanInfeasible(format!("switch rate {switch_rate}")));
    }
    let l = landscape_of(p)?;
    let extrema = [l.argmin(), l.argmax()];
    let mut best: Option<Candidate> = None;
    for order in [[0usize, 1], [1, 0]] {
        let a = extrema[order[0]];
        let b = extrema[order[1]];
        for code in 0..8u8 {
            let dirs = [0, 1, 2].map(|i| if code >> i & 1 == 1 { -1.0 } else { 1.0 });
            let (l1, i1) = leg(p, z0.x, a.location, dirs[0]);
            let (l2, i2) = leg(p, a.location, b.location, dirs[1]);
            let (l3, i3) = leg(p, b.location, x1, dirs[2]);
            let travel = l1 + l2 + l3;
            let rest = t - travel;
            if rest < 0.0 {
                continue;
            }
            // w_a + w_b = rest,  F(a) w_a + F(b) w_b = need.
            let need = u1 - z0.u - (i1 + i2 + i3);
            let wa = (need - b.value * rest) / (a.value - b.value);
            let wb = rest - wa;
            if wa < 0.0 || wb < 0.0 {
                continue;
            }
            if best.as_ref().is_none_or(|c| travel < c.travel) {
                best = Some(Candidate {
                    travel,
                    waypoints: [a.location, b.location],
                    dirs,
                    dwells: [wa, wb],
                });
            }
        }
    }
    let c =
        best.ok_or_else(|| ControlError::PlanInfeasible(format!("no travel/dwell split reaches u = {u1} at t = {t}")))?;
    let mut pieces = Vec::new();
    let mut from = z0.x;
    for i in 0..2 {
        let (len, _) = leg(p, from, c.waypoints[i], c.dirs[i]);
        pieces.push((len, c.dirs[i]));
        dwell(&mut pieces, c.dwells[i], switch_rate, c.dirs[i]);
        from = c.waypoints[i];
    }
    let (len, _) = leg(p, from, x1, c.dirs[2]);
    pieces.push((len, c.dirs[2]));
    let schedule = ControlSchedule::from_pieces(pieces);
    let terminal_velocity = *schedule.values.last().unwrap_or(&z0.y);
    Ok(VelocityPlan {
        schedule,
        terminal_velocity,
    })
}
