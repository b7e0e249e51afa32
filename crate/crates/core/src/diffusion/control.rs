//! Piecewise-constant steering of the controlled system
//! `x' = v - u F'(x)`, `u' = F(x)`.

use super::DiffusionState;
use crate::circle::wrap;
use crate::landscape::{landscape_of, PeriodicPotential};
use crate::schedule::{reachable_interval, ControlError, ControlSchedule};

const MAX_STEP: f64 = 1e-4;
const REFINE_ROUNDS: usize = 8;

fn rk4_piece(p: &PeriodicPotential, mut x: f64, mut u: f64, v: f64, len: f64) -> (f64, f64) {
    if len <= 0.0 {
        return (x, u);
    }
    let n = (len / MAX_STEP).ceil().max(1.0) as usize;
    let h = len / n as f64;
    let field = |x: f64, u: f64| {
        let (f, df) = p.value_and_slope(x);
        (v - u * df, f)
    };
    for _ in 0..n {
        let (k1x, k1u) = field(x, u);
        let (k2x, k2u) = field(x + 0.5 * h * k1x, u + 0.5 * h * k1u);
        let (k3x, k3u) = field(x + 0.5 * h * k2x, u + 0.5 * h * k2u);
        let (k4x, k4u) = field(x + h * k3x, u + h * k3u);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    }
    (x, u)
}

/// Integrates the controlled system along `schedule` (RK4, step ≤ 1e-4).
pub fn integrate_controlled(p: &PeriodicPotential, z0: DiffusionState, schedule: &ControlSchedule) -> DiffusionState {
    let (mut x, mut u) = (z0.x, z0.u);
    for (len, v) in schedule.pieces() {
        (x, u) = rk4_piece(p, x, u, v, len);
    }
    DiffusionState { x: wrap(x), u }
}

/// Constant `v` moving `x` to the nearest copy of `target` in time `eps`.
fn shoot(p: &PeriodicPotential, x: f64, u: f64, target: f64, eps: f64) -> (f64, f64, f64) {
    let mut d = wrap(target - x);
    if d > std::f64::consts::PI {
        d -= std::f64::consts::TAU;
    }
    let goal = x + d;
    let reach = |v: f64| rk4_piece(p, x, u, v, eps).0 - goal;
    let slack = (u.abs() + eps * p.coefficient_bound(0)) * p.coefficient_bound(1) + 1.0;
    let mut lo = d / eps - 2.0 * slack;
    let mut hi = d / eps + 2.0 * slack;
    while reach(lo) > 0.0 {
        lo -= slack;
    }
    while reach(hi) < 0.0 {
        hi += slack;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if reach(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = if reach(lo).abs() <= reach(hi).abs() { lo } else { hi };
    let (xe, ue) = rk4_piece(p, x, u, v, eps);
    (v, xe, ue)
}

/// Builds `v` on `[0, t]` taking `z0` to `z1`: steer to the global minimum
/// of `F` in time `eps`, rest there, steer to the global maximum, rest, and
/// steer to `x1` in the last `eps`. The rest times are chosen so that the
/// accumulated `u` lands on `u1`; `x(t) = x1` up to the shooting precision.
pub fn plan_diffusion_control(
    p: &PeriodicPotential,
    z0: DiffusionState,
    z1: DiffusionState,
    t: f64,
    eps: f64,
) -> Result<ControlSchedule, ControlError> {
    let (lo, hi) = reachable_interval(p, z0.u, t);
    if !(z1.u > lo && z1.u < hi) {
        return Err(ControlError::Unreachable { u1: z1.u, lo, hi });
    }
    let (xf, uf) = rk4_piece(p, z0.x, z0.u, 0.0, t);
    if crate::circle::distance(xf, z1.x) < 1e-9 && (uf - z1.u).abs() < 1e-9 {
        return Ok(ControlSchedule::constant(0.0, t));
    }
    if !(eps > 0.0) || t <= 3.0 * eps {
        return Err(ControlError::PlanInfeasible(format!(
            "t = {t} too short for eps = {eps}"
        )));
    }
    let l = landscape_of(p)?;
    let (xmin, fmin) = (l.argmin().location, l.argmin().value);
    let (xmax, fmax) = (l.argmax().location, l.argmax().value);
    let rest = t - 3.0 * eps;

    // Steering increments depend on u at the start of each steer, which in
    // turn depends on the rest times; a few fixed-point rounds settle it.
    let mut steer_du = 0.0;
    let mut pieces = Vec::new();
    for _ in 0..REFINE_ROUNDS {
        let need = z1.u - z0.u - steer_du;
        let d_max = ((need - fmin * rest) / (fmax - fmin)).clamp(0.0, rest);
        let d_min = rest - d_max;

        pieces.clear();
        let mut du = 0.0;
        let (mut x, mut u) = (z0.x, z0.u);
        for (target, dwell) in [(xmin, d_min), (xmax, d_max), (z1.x, 0.0)] {
            let (v, xe, ue) = shoot(p, x, u, target, eps);
            du += ue - u;
            pieces.push((eps, v));
            (x, u) = rk4_piece(p, xe, ue, 0.0, dwell);
            pieces.push((dwell, 0.0));
        }
        steer_du = du;
    }
    Ok(ControlSchedule::from_pieces(pieces))
}
