//! The potential `F` and the level-set apparatus built around its minima.

mod assumptions;
mod critical;
mod geometry;
mod potential;

pub use assumptions::{validate_assumptions, AssumptionCheck, AssumptionReport};
pub use critical::{
    classify_landscape, find_critical_points, landscape_of, CriticalLandscape, CriticalPoint, CriticalSearch,
    ExtremumKind,
};
pub use geometry::{compute_delta, compute_level_geometry, LevelGeometry, MinimumGeometry};
pub use potential::{Harmonic, PeriodicPotential, PotentialRecord};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LandscapeError {
    #[error("potential is constant")]
    Constant,
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),
    #[error("cannot parse potential: {0}")]
    Parse(String),
    #[error("critical point at {location} has no non-vanishing derivative up to the search order")]
    DegenerateCriticalPoint { location: f64 },
    #[error("critical value F({location}) is zero")]
    ZeroCriticalValue { location: f64 },
    #[error("no admissible delta found above the search floor")]
    NoValidDelta,
    #[error("sublevel set {{F <= {level}}} around {location} wraps the whole circle")]
    ComponentIsCircle { location: f64, level: f64 },
    #[error("eta must satisfy 0 < eta <= delta (eta = {eta}, delta = {delta})")]
    InvalidEta { eta: f64, delta: f64 },
    #[error("F is not monotone on the arc [{from}, {to}]")]
    NotMonotone { from: f64, to: f64 },
}

/// Bisection for a sign change of `f` between `a` and `b` (either order),
/// given `fa = f(a) != 0`. Runs until the midpoint is no longer
/// representable strictly between the endpoints.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg = fa < 0.0;
    for _ in 0..256 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Everything `analyze` reports about a potential.
#[derive(Debug, Clone, Serialize)]
pub struct LandscapeReport {
    pub potential: PeriodicPotential,
    pub assumptions: AssumptionReport,
    pub landscape: Option<CriticalLandscape>,
    /// Indices into the trap set, as angles.
    pub traps: Vec<f64>,
    pub ergodic: Option<bool>,
    pub min_value: f64,
    pub max_value: f64,
    pub slope_sup: f64,
    pub geometry: Option<LevelGeometry>,
    pub errors: Vec<String>,
}

/// Runs the full landscape analysis, collecting failures instead of stopping
/// at the first one.
pub fn analyze(p: &PeriodicPotential) -> LandscapeReport {
    let mut errors = Vec::new();
    let landscape = match landscape_of(p) {
        Ok(l) => Some(l),
        Err(e) => {
            errors.push(e.to_string());
            None
        }
    };
    let geometry = landscape.as_ref().and_then(|l| {
        let delta = compute_delta(p, l).map_err(|e| errors.push(e.to_string())).ok()?;
        compute_level_geometry(p, l, delta, delta)
            .map_err(|e| errors.push(e.to_string()))
            .ok()
    });
    LandscapeReport {
        potential: p.clone(),
        assumptions: validate_assumptions(p),
        traps: landscape.as_ref().map(|l| l.traps()).unwrap_or_default(),
        ergodic: landscape.as_ref().map(|l| l.is_ergodic()),
        landscape,
        min_value: p.min_value(),
        max_value: p.max_value(),
        slope_sup: p.sup_norm(1),
        geometry,
        errors,
    }
}
