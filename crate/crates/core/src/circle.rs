//! Angles on the circle `[0, 2π)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Wraps an angle into `[0, 2π)`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    // Steps are small relative to the period, so the cheap branches cover
    // nearly every call.
    let y = if x >= TAU {
        x - TAU
    } else if x < 0.0 {
        x + TAU
    } else {
        return x;
    };
    if (0.0..TAU).contains(&y) {
        y
    } else {
        let r = x.rem_euclid(TAU);
        if r >= TAU {
            0.0
        } else {
            r
        }
    }
}

/// Geodesic distance on the circle.
#[inline]
pub fn distance(x: f64, y: f64) -> f64 {
    let d = (wrap(x) - wrap(y)).abs();
    d.min(TAU - d)
}

/// Counter-clockwise distance travelled from `from` to reach `to`, in `[0, 2π)`.
#[inline]
pub fn ccw(from: f64, to: f64) -> f64 {
    wrap(to - from)
}

/// A closed arc `[start, start + length]` traversed counter-clockwise.
///
/// A zero-length arc is a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub length: f64,
}

impl Arc {
    pub fn new(start: f64, length: f64) -> Self {
        Arc {
            start: wrap(start),
            length: length.clamp(0.0, TAU),
        }
    }

    pub fn point(x: f64) -> Self {
        Arc::new(x, 0.0)
    }

    /// The arc from `a` counter-clockwise to `b`.
    pub fn between(a: f64, b: f64) -> Self {
        Arc::new(a, ccw(a, b))
    }

    pub fn end(&self) -> f64 {
        wrap(self.start + self.length)
    }

    pub fn contains(&self, x: f64) -> bool {
        ccw(self.start, x) <= self.length
    }

    pub fn midpoint(&self) -> f64 {
        wrap(self.start + 0.5 * self.length)
    }

    /// Arc length needed to first touch the arc when moving from `x` by the
    /// signed `displacement`, or `None` if the move stays clear of it.
    pub fn first_touch(&self, x: f64, displacement: f64) -> Option<f64> {
        if self.contains(x) {
            return Some(0.0);
        }
        let s = if displacement >= 0.0 {
            ccw(x, self.start)
        } else {
            ccw(self.end(), x)
        };
        (s <= displacement.abs()).then_some(s)
    }
}
