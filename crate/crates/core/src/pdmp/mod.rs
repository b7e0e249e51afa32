//! Event-driven simulation of the velocity-jump process: `X` moves at unit
//! speed `Y = ±1`, `U' = F(X)`, and `Y` flips at rate `λ + (Y U F'(X))_+`.
//!
//! The two parts of the rate are separate clocks. The constant one is a
//! plain exponential; the landscape one is sampled by thinning over short
//! windows, with `U` along the segment in closed form. Nothing is
//! discretised in time.

mod control;
mod oracle;

pub use control::{integrate_velocity_schedule, plan_pdmp_velocity_schedule, VelocityPlan};
pub use oracle::{jump_time_cdf_oracle, jump_time_cdf_oracle_driven, CdfTable};

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

use crate::circle::wrap;
use crate::drive::Drive;
use crate::landscape::PeriodicPotential;
use crate::path::{PathWalker, Sweep};
use crate::seeding::SimRng;

pub const DEFAULT_MAX_EVENTS: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdmpError {
    #[error("jump rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("more than {cap} events before t = {time}")]
    RunawayEvents { cap: u64, time: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cause {
    Landscape,
    ConstantRate,
    HorizonEnd,
}

impl Cause {
    pub fn as_str(self) -> &'static str {
        match self {
            Cause::Landscape => "landscape",
            Cause::ConstantRate => "constant-rate",
            Cause::HorizonEnd => "horizon-end",
        }
    }
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdmpState {
    pub x: f64,
    pub u: f64,
    /// `+1.0` or `-1.0`.
    pub y: f64,
}

impl PdmpState {
    pub fn new(x: f64, u: f64, y: f64) -> Self {
        Self {
            x: wrap(x),
            u,
            y: if y < 0.0 { -1.0 } else { 1.0 },
        }
    }
}

/// `λ + (y u F'(x))_+`.
pub fn local_rate(p: &PeriodicPotential, lambda: f64, s: &PdmpState) -> f64 {
    lambda + (s.y * s.u * p.slope(s.x)).max(0.0)
}

/// `u0 + ∫_0^s F(x0 + y r) dr`.
pub fn segment_u(p: &PeriodicPotential, x0: f64, y: f64, s: f64, u0: f64) -> f64 {
    u0 + p.line_integral(x0, y, s)
}

/// The landscape intensity along one segment, with window bounds.
trait LandscapeIntensity {
    fn rate(&self, s: f64) -> f64;
    fn bound(&self, s0: f64, s1: f64) -> f64;
}

struct Autonomous<'a> {
    p: &'a PeriodicPotential,
    x0: f64,
    y: f64,
    u0: f64,
    g0: f64,
    abs_max: f64,
    slope_sup: f64,
}

impl Autonomous<'_> {
    #[inline]
    fn u_at(&self, s: f64) -> f64 {
        let (_, g) = self.p.slope_and_primitive(self.x0 + self.y * s);
        self.u0 + self.p.a0() * s + self.y * (g - self.g0)
    }
}

impl LandscapeIntensity for Autonomous<'_> {
    #[inline]
    fn rate(&self, s: f64) -> f64 {
        let (df, g) = self.p.slope_and_primitive(self.x0 + self.y * s);
        let u = self.u0 + self.p.a0() * s + self.y * (g - self.g0);
        (self.y * u * df).max(0.0)
    }

    fn bound(&self, s0: f64, s1: f64) -> f64 {
        let u = if s0 == 0.0 { self.u0 } else { self.u_at(s0) };
        (u.abs() + (s1 - s0) * self.abs_max) * self.slope_sup
    }
}

struct Driven<'a, G: ?Sized> {
    p: &'a PeriodicPotential,
    g: &'a G,
    t0: f64,
    x0: f64,
    y: f64,
    slope_sup: f64,
}

impl<G: Drive + ?Sized> LandscapeIntensity for Driven<'_, G> {
    #[inline]
    fn rate(&self, s: f64) -> f64 {
        (self.y * self.g.value(self.t0 + s) * self.p.slope(self.x0 + self.y * s)).max(0.0)
    }

    fn bound(&self, s0: f64, s1: f64) -> f64 {
        self.g.bound(self.t0 + s0, self.t0 + s1) * self.slope_sup
    }
}

/// One inter-event piece of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t0: f64,
    pub x0: f64,
    pub u0: f64,
    pub y: f64,
    pub duration: f64,
    /// What ends the segment.
    pub cause: Cause,
}

impl Segment {
    pub fn end_x(&self) -> f64 {
        wrap(self.x0 + self.y * self.duration)
    }
}

/// Precomputed constants for a given `F` and `λ`.
#[derive(Debug, Clone)]
pub struct PdmpModel<'a> {
    p: &'a PeriodicPotential,
    lambda: f64,
    slope_sup: f64,
    abs_max: f64,
    window: f64,
}

impl<'a> PdmpModel<'a> {
    pub fn new(p: &'a PeriodicPotential, lambda: f64) -> Result<Self, PdmpError> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(PdmpError::InvalidRate(lambda));
        }
        let slope_sup = p.sup_norm(1);
        Ok(Self {
            p,
            lambda,
            slope_sup,
            abs_max: p.sup_norm(0),
            window: PI.min(0.5 / slope_sup),
        })
    }

    pub fn potential(&self) -> &'a PeriodicPotential {
        self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Thinning window length `min(π, 1 / (2 ‖F'‖_∞))`.
    pub fn window(&self) -> f64 {
        self.window
    }

    /// First landscape event in `(0, cap)`, if any.
    fn thin<I: LandscapeIntensity>(&self, src: &I, cap: f64, rng: &mut SimRng) -> Option<f64> {
        let mut w0 = 0.0;
        while w0 < cap {
            let w1 = (w0 + self.window).min(cap);
            let rbar = src.bound(w0, w1);
            if rbar > 0.0 {
                let mut s = w0;
                loop {
                    let e: f64 = rng.sample(Exp1);
                    s += e / rbar;
                    if s >= w1 {
                        break;
                    }
                    let r = src.rate(s);
                    debug_assert!(r <= rbar * (1.0 + 1e-9), "thinning bound {rbar} below rate {r}");
                    if rng.random::<f64>() * rbar < r {
                        return Some(s);
                    }
                }
            }
            w0 = w1;
        }
        None
    }

    /// Draws `θ₂ = E / λ`, then thins the landscape clock up to
    /// `min(θ₂, limit)`. Ties go to the constant-rate clock; if neither
    /// fires before `limit` the result is `(limit, HorizonEnd)`.
    fn race<I: LandscapeIntensity>(&self, src: &I, rng: &mut SimRng, limit: f64) -> (f64, Cause) {
        let e: f64 = rng.sample(Exp1);
        let theta2 = if self.lambda > 0.0 {
            e / self.lambda
        } else {
            f64::INFINITY
        };
        let cap = theta2.min(limit);
        match self.thin(src, cap, rng) {
            Some(theta1) => (theta1, Cause::Landscape),
            None if theta2 <= limit => (theta2, Cause::ConstantRate),
            None => (limit, Cause::HorizonEnd),
        }
    }

    pub fn sample_next_event(&self, s: &PdmpState, rng: &mut SimRng, limit: f64) -> (f64, Cause) {
        let (_, g0) = self.p.slope_and_primitive(s.x);
        let src = Autonomous {
            p: self.p,
            x0: s.x,
            y: s.y,
            u0: s.u,
            g0,
            abs_max: self.abs_max,
            slope_sup: self.slope_sup,
        };
        self.race(&src, rng, limit)
    }

    /// Next event of the driven process started at `(x, y)` at time `t0`.
    pub fn sample_next_event_driven<G: Drive + ?Sized>(
        &self,
        g: &G,
        t0: f64,
        x: f64,
        y: f64,
        rng: &mut SimRng,
        limit: f64,
    ) -> (f64, Cause) {
        let src = Driven {
            p: self.p,
            g,
            t0,
            x0: x,
            y,
            slope_sup: self.slope_sup,
        };
        self.race(&src, rng, limit)
    }

    /// Runs to `horizon`, handing each segment to `on_segment`. Returns the
    /// state at the horizon.
    pub fn run<S: FnMut(&Segment)>(
        &self,
        z0: PdmpState,
        horizon: f64,
        rng: &mut SimRng,
        max_events: u64,
        mut on_segment: S,
    ) -> Result<PdmpState, PdmpError> {
        let mut s = PdmpState::new(z0.x, z0.u, z0.y);
        let mut t = 0.0;
        let mut events = 0u64;
        loop {
            let (theta, cause) = self.sample_next_event(&s, rng, horizon - t);
            on_segment(&Segment {
                t0: t,
                x0: s.x,
                u0: s.u,
                y: s.y,
                duration: theta,
                cause,
            });
            s.u = segment_u(self.p, s.x, s.y, theta, s.u);
            s.x = wrap(s.x + s.y * theta);
            if cause == Cause::HorizonEnd {
                return Ok(s);
            }
            t += theta;
            s.y = -s.y;
            events += 1;
            if events > max_events {
                return Err(PdmpError::RunawayEvents {
                    cap: max_events,
                    time: t,
                });
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn run_driven<G: Drive + ?Sized, S: FnMut(&Segment)>(
        &self,
        g: &G,
        x0: f64,
        y0: f64,
        horizon: f64,
        rng: &mut SimRng,
        max_events: u64,
        mut on_segment: S,
    ) -> Result<(f64, f64), PdmpError> {
        let (mut x, mut y) = (wrap(x0), if y0 < 0.0 { -1.0 } else { 1.0 });
        let mut t = 0.0;
        let mut events = 0u64;
        loop {
            let (theta, cause) = self.sample_next_event_driven(g, t, x, y, rng, horizon - t);
            on_segment(&Segment {
                t0: t,
                x0: x,
                u0: g.value(t),
                y,
                duration: theta,
                cause,
            });
            x = wrap(x + y * theta);
            if cause == Cause::HorizonEnd {
                return Ok((x, y));
            }
            t += theta;
            y = -y;
            events += 1;
            if events > max_events {
                return Err(PdmpError::RunawayEvents {
                    cap: max_events,
                    time: t,
                });
            }
        }
    }
}

/// A jump, or the horizon row; `state` is the state just after the event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub state: PdmpState,
    pub cause: Cause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub initial: PdmpState,
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn horizon(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.t)
    }

    pub fn terminal(&self) -> PdmpState {
        self.events.last().map_or(self.initial, |e| e.state)
    }

    /// Number of jumps (the horizon row excluded).
    pub fn jumps(&self) -> usize {
        self.events.iter().filter(|e| e.cause != Cause::HorizonEnd).count()
    }

    /// Segments between consecutive rows; `u` along each is
    /// `u0 + ∫ F(x0 + y r) dr`.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        let starts = std::iter::once((0.0, self.initial)).chain(self.events.iter().map(|e| (e.t, e.state)));
        starts.zip(&self.events).map(|((t0, s), e)| Segment {
            t0,
            x0: s.x,
            u0: s.u,
            y: s.y,
            duration: e.t - t0,
            cause: e.cause,
        })
    }

    /// State at time `t` (at a jump time, the state after the jump).
    pub fn state_at(&self, p: &PeriodicPotential, t: f64) -> PdmpState {
        let i = self.events.partition_point(|e| e.t <= t);
        let (t0, s) = if i == 0 {
            (0.0, self.initial)
        } else {
            (self.events[i - 1].t, self.events[i - 1].state)
        };
        let ds = t - t0;
        PdmpState {
            x: wrap(s.x + s.y * ds),
            u: segment_u(p, s.x, s.y, ds, s.u),
            y: s.y,
        }
    }
}

fn push_event(log: &mut EventLog, seg: &Segment, u_end: f64) {
    let flip = if seg.cause == Cause::HorizonEnd { 1.0 } else { -1.0 };
    log.events.push(Event {
        t: seg.t0 + seg.duration,
        state: PdmpState {
            x: seg.end_x(),
            u: u_end,
            y: seg.y * flip,
        },
        cause: seg.cause,
    });
}

pub fn simulate_pdmp(
    p: &PeriodicPotential,
    lambda: f64,
    z0: PdmpState,
    horizon: f64,
    rng: &mut SimRng,
    max_events: u64,
) -> Result<EventLog, PdmpError> {
    let model = PdmpModel::new(p, lambda)?;
    let z0 = PdmpState::new(z0.x, z0.u, z0.y);
    let mut log = EventLog {
        initial: z0,
        events: Vec::new(),
    };
    model.run(z0, horizon, rng, max_events, |seg| {
        push_event(&mut log, seg, segment_u(p, seg.x0, seg.y, seg.duration, seg.u0));
    })?;
    Ok(log)
}

/// The driven process; the `u` column of the log holds `g(t)`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_pdmp_driven<G: Drive + ?Sized>(
    p: &PeriodicPotential,
    lambda: f64,
    g: &G,
    x0: f64,
    y0: f64,
    horizon: f64,
    rng: &mut SimRng,
    max_events: u64,
) -> Result<EventLog, PdmpError> {
    let model = PdmpModel::new(p, lambda)?;
    let initial = PdmpState::new(x0, g.value(0.0), y0);
    let mut log = EventLog {
        initial,
        events: Vec::new(),
    };
    model.run_driven(g, x0, y0, horizon, rng, max_events, |seg| {
        push_event(&mut log, seg, g.value(seg.t0 + seg.duration));
    })?;
    Ok(log)
}

pub struct PdmpWalker<'a> {
    model: &'a PdmpModel<'a>,
    state: PdmpState,
    t: f64,
}

impl<'a> PdmpWalker<'a> {
    pub fn new(model: &'a PdmpModel<'a>, z0: PdmpState) -> Self {
        Self {
            model,
            state: PdmpState::new(z0.x, z0.u, z0.y),
            t: 0.0,
        }
    }

    pub fn state(&self) -> PdmpState {
        self.state
    }
}

impl PathWalker for PdmpWalker<'_> {
    fn time(&self) -> f64 {
        self.t
    }

    fn position(&self) -> f64 {
        self.state.x
    }

    fn advance(&mut self, rng: &mut SimRng, limit: f64) -> Sweep {
        let s = self.state;
        let (theta, cause) = self.model.sample_next_event(&s, rng, limit - self.t);
        let sweep = Sweep {
            t0: self.t,
            x0: s.x,
            displacement: s.y * theta,
            duration: theta,
            exact: true,
        };
        self.state.u = segment_u(self.model.p, s.x, s.y, theta, s.u);
        self.state.x = wrap(s.x + s.y * theta);
        if cause != Cause::HorizonEnd {
            self.state.y = -s.y;
        }
        self.t += theta;
        sweep
    }
}

pub struct DrivenPdmpWalker<'a, G: ?Sized> {
    model: &'a PdmpModel<'a>,
    g: &'a G,
    x: f64,
    y: f64,
    t: f64,
}

impl<'a, G: Drive + ?Sized> DrivenPdmpWalker<'a, G> {
    pub fn new(model: &'a PdmpModel<'a>, g: &'a G, x0: f64, y0: f64) -> Self {
        Self {
            model,
            g,
            x: wrap(x0),
            y: if y0 < 0.0 { -1.0 } else { 1.0 },
            t: 0.0,
        }
    }
}

impl<G: Drive + ?Sized> PathWalker for DrivenPdmpWalker<'_, G> {
    fn time(&self) -> f64 {
        self.t
    }

    fn position(&self) -> f64 {
        self.x
    }

    fn advance(&mut self, rng: &mut SimRng, limit: f64) -> Sweep {
        let (theta, cause) = self
            .model
            .sample_next_event_driven(self.g, self.t, self.x, self.y, rng, limit - self.t);
        let sweep = Sweep {
            t0: self.t,
            x0: self.x,
            displacement: self.y * theta,
            duration: theta,
            exact: true,
        };
        self.x = wrap(self.x + self.y * theta);
        if cause != Cause::HorizonEnd {
            self.y = -self.y;
        }
        self.t += theta;
        sweep
    }
}

#[cfg(test)]
mod tests;
