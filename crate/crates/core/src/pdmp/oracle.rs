//! Jump-time distribution by direct quadrature of the intensity, for
//! checking the thinning sampler.

use serde::{Deserialize, Serialize};

use super::segment_u;
use crate::drive::Drive;
use crate::landscape::PeriodicPotential;
use crate::quad::composite_simpson;

const SUBINTERVALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfTable {
    pub grid: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl CdfTable {
    /// Linear interpolation; flat beyond the last grid point.
    pub fn eval(&self, s: f64) -> f64 {
        let i = self.grid.partition_point(|&g| g <= s);
        if i == 0 {
            return 0.0;
        }
        if i == self.grid.len() {
            return *self.cdf.last().unwrap();
        }
        let (g0, g1) = (self.grid[i - 1], self.grid[i]);
        let w = (s - g0) / (g1 - g0);
        self.cdf[i - 1] * (1.0 - w) + self.cdf[i] * w
    }
}

fn tabulate<R: Fn(f64) -> f64>(rate: R, grid: &[f64]) -> CdfTable {
    let mut big_lambda = 0.0;
    let mut cdf = Vec::with_capacity(grid.len());
    let mut prev = 0.0;
    for &s in grid {
        if s > prev {
            big_lambda += composite_simpson(&rate, prev, s, SUBINTERVALS);
        }
        prev = s;
        cdf.push(1.0 - (-big_lambda).exp());
    }
    CdfTable {
        grid: grid.to_vec(),
        cdf,
    }
}

/// `1 - exp(-Λ(s))` on `grid`, with
/// `Λ(s) = ∫_0^s λ + (y u(r) F'(x0 + y r))_+ dr` and `u` the autonomous
/// segment from `u0`. Each grid cell gets 10⁴ Simpson subintervals.
pub fn jump_time_cdf_oracle(p: &PeriodicPotential, lambda: f64, x0: f64, y: f64, u0: f64, grid: &[f64]) -> CdfTable {
    let rate = |s: f64| lambda + (y * segment_u(p, x0, y, s, u0) * p.slope(x0 + y * s)).max(0.0);
    tabulate(rate, grid)
}

/// As [`jump_time_cdf_oracle`] with `u(r)` replaced by `g(t0 + r)`.
pub fn jump_time_cdf_oracle_driven<G: Drive + ?Sized>(
    p: &PeriodicPotential,
    lambda: f64,
    g: &G,
    t0: f64,
    x0: f64,
    y: f64,
    grid: &[f64],
) -> CdfTable {
    let rate = |s: f64| lambda + (y * g.value(t0 + s) * p.slope(x0 + y * s)).max(0.0);
    tabulate(rate, grid)
}
