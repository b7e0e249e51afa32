//! Euler–Maruyama simulation of the self-interacting diffusion
//!
//! ```text
//! dX = dB - U F'(X) dt,   dU = F(X) dt
//! ```
//!
//! on the circle, of its driven variant with `U` replaced by a prescribed
//! `g(t)`, and the analytic tools around them.

mod control;
mod scale;

pub use control::{integrate_controlled, plan_diffusion_control};
pub use scale::{analytic_escape_probability, ExitProbability};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::circle::wrap;
use crate::drive::Drive;
use crate::landscape::PeriodicPotential;
use crate::path::{PathWalker, Sweep};
use crate::seeding::SimRng;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_RECORD_EVERY: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionState {
    pub x: f64,
    pub u: f64,
}

impl DiffusionState {
    pub fn new(x: f64, u: f64) -> Self {
        Self { x: wrap(x), u }
    }
}

/// One Euler–Maruyama step with a given standard normal draw.
#[inline]
pub fn em_step(p: &PeriodicPotential, s: DiffusionState, dt: f64, gaussian: f64) -> DiffusionState {
    let (f, df) = p.value_and_slope(s.x);
    DiffusionState {
        x: wrap(s.x + dt.sqrt() * gaussian - s.u * df * dt),
        u: s.u + f * dt,
    }
}

/// Number of steps covering `horizon` (the last step ends at or just past it).
pub fn step_count(horizon: f64, dt: f64) -> u64 {
    let n = horizon / dt;
    let r = n.round();
    if (n - r).abs() < 1e-9 * r.max(1.0) {
        r as u64
    } else {
        n.ceil() as u64
    }
}

/// Runs `steps` EM steps, calling `observe(i, state)` on the initial state
/// and after every step.
pub fn evolve<O: FnMut(u64, &DiffusionState)>(
    p: &PeriodicPotential,
    z0: DiffusionState,
    dt: f64,
    steps: u64,
    rng: &mut SimRng,
    mut observe: O,
) -> DiffusionState {
    let sq = dt.sqrt();
    let mut s = DiffusionState::new(z0.x, z0.u);
    observe(0, &s);
    for i in 1..=steps {
        let g: f64 = rng.sample(StandardNormal);
        let (f, df) = p.value_and_slope(s.x);
        s = DiffusionState {
            x: wrap(s.x + sq * g - s.u * df * dt),
            u: s.u + f * dt,
        };
        observe(i, &s);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub seed: Option<u64>,
    pub dt: f64,
    pub record_every: u64,
    pub times: Vec<f64>,
    pub states: Vec<DiffusionState>,
    /// State at the horizon, recorded even when the stride skips it.
    pub terminal: DiffusionState,
    pub horizon: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Samples with `t >= from`.
    pub fn since(&self, from: f64) -> impl Iterator<Item = (f64, &DiffusionState)> {
        self.times
            .iter()
            .copied()
            .zip(&self.states)
            .filter(move |(t, _)| *t >= from)
    }
}

/// Simulates up to `horizon`, keeping every `record_every`-th state.
pub fn simulate_diffusion(
    p: &PeriodicPotential,
    z0: DiffusionState,
    horizon: f64,
    dt: f64,
    rng: &mut SimRng,
    record_every: u64,
) -> Trajectory {
    let steps = step_count(horizon, dt);
    let stride = record_every.max(1);
    let cap = (steps / stride + 1) as usize;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    let terminal = evolve(p, z0, dt, steps, rng, |i, s| {
        if i % stride == 0 {
            times.push(i as f64 * dt);
            states.push(*s);
        }
    });
    Trajectory {
        seed: None,
        dt,
        record_every: stride,
        times,
        states,
        terminal,
        horizon: steps as f64 * dt,
    }
}

/// Terminal `U` for time steps `dt · 2^k`, `k < levels`, all driven by the
/// same Brownian path: each coarse increment is the sum of the fine ones
/// it covers.
pub fn coupled_terminal_u(
    p: &PeriodicPotential,
    z0: DiffusionState,
    horizon: f64,
    dt: f64,
    levels: usize,
    rng: &mut SimRng,
) -> Vec<f64> {
    let top = 1u64 << (levels - 1);
    let blocks = step_count(horizon, dt * top as f64);
    let mut states = vec![z0; levels];
    let mut acc = vec![0.0; levels];
    let sq = dt.sqrt();
    for _ in 0..blocks {
        for i in 1..=top {
            let db: f64 = sq * rng.sample::<f64, _>(StandardNormal);
            for (k, a) in acc.iter_mut().enumerate() {
                *a += db;
                let width = 1u64 << k;
                if i % width == 0 {
                    let h = dt * width as f64;
                    let s = states[k];
                    let (f, df) = p.value_and_slope(s.x);
                    states[k] = DiffusionState {
                        x: wrap(s.x + *a - s.u * df * h),
                        u: s.u + f * h,
                    };
                    *a = 0.0;
                }
            }
        }
    }
    states.iter().map(|s| s.u).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivenTrajectory {
    pub dt: f64,
    pub record_every: u64,
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
}

/// `dX = dB - g(t) F'(X) dt`.
pub fn simulate_diffusion_driven<G: Drive + ?Sized>(
    p: &PeriodicPotential,
    g: &G,
    x0: f64,
    horizon: f64,
    dt: f64,
    rng: &mut SimRng,
    record_every: u64,
) -> DrivenTrajectory {
    let steps = step_count(horizon, dt);
    let stride = record_every.max(1);
    let sq = dt.sqrt();
    let mut x = wrap(x0);
    let mut times = vec![0.0];
    let mut xs = vec![x];
    for i in 1..=steps {
        let t = (i - 1) as f64 * dt;
        let n: f64 = rng.sample(StandardNormal);
        x = wrap(x + sq * n - g.value(t) * p.slope(x) * dt);
        if i % stride == 0 {
            times.push(i as f64 * dt);
            xs.push(x);
        }
    }
    DrivenTrajectory {
        dt,
        record_every: stride,
        times,
        xs,
    }
}

/// Step-by-step walker over the autonomous diffusion.
pub struct DiffusionWalker<'a> {
    p: &'a PeriodicPotential,
    dt: f64,
    t: f64,
    state: DiffusionState,
}

impl<'a> DiffusionWalker<'a> {
    pub fn new(p: &'a PeriodicPotential, z0: DiffusionState, dt: f64) -> Self {
        Self {
            p,
            dt,
            t: 0.0,
            state: z0,
        }
    }

    pub fn state(&self) -> DiffusionState {
        self.state
    }
}

impl PathWalker for DiffusionWalker<'_> {
    fn time(&self) -> f64 {
        self.t
    }

    fn position(&self) -> f64 {
        self.state.x
    }

    fn advance(&mut self, rng: &mut SimRng, limit: f64) -> Sweep {
        let h = self.dt.min(limit - self.t).max(0.0);
        let n: f64 = rng.sample(StandardNormal);
        let (f, df) = self.p.value_and_slope(self.state.x);
        let disp = h.sqrt() * n - self.state.u * df * h;
        let sweep = Sweep {
            t0: self.t,
            x0: self.state.x,
            displacement: disp,
            duration: h,
            exact: false,
        };
        self.state = DiffusionState {
            x: wrap(self.state.x + disp),
            u: self.state.u + f * h,
        };
        self.t += h;
        sweep
    }
}

/// Step-by-step walker over the driven diffusion.
pub struct DrivenDiffusionWalker<'a, G: ?Sized> {
    p: &'a PeriodicPotential,
    g: &'a G,
    dt: f64,
    t: f64,
    x: f64,
}

impl<'a, G: Drive + ?Sized> DrivenDiffusionWalker<'a, G> {
    pub fn new(p: &'a PeriodicPotential, g: &'a G, x0: f64, dt: f64) -> Self {
        Self {
            p,
            g,
            dt,
            t: 0.0,
            x: wrap(x0),
        }
    }
}

impl<G: Drive + ?Sized> PathWalker for DrivenDiffusionWalker<'_, G> {
    fn time(&self) -> f64 {
        self.t
    }

    fn position(&self) -> f64 {
        self.x
    }

    fn advance(&mut self, rng: &mut SimRng, limit: f64) -> Sweep {
        let h = self.dt.min(limit - self.t).max(0.0);
        let n: f64 = rng.sample(StandardNormal);
        let disp = h.sqrt() * n - self.g.value(self.t) * self.p.slope(self.x) * h;
        let sweep = Sweep {
            t0: self.t,
            x0: self.x,
            displacement: disp,
            duration: h,
            exact: false,
        };
        self.x = wrap(self.x + disp);
        self.t += h;
        sweep
    }
}
