//! Time-dependent levels `g(t)` that replace `U` in the driven dynamics.

use serde::{Deserialize, Serialize};

pub trait Drive: Sync {
    fn value(&self, t: f64) -> f64;
    /// An upper bound on `sup |g|` over `[t0, t1]`.
    fn bound(&self, t0: f64, t1: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantDrive(pub f64);

impl Drive for ConstantDrive {
    fn value(&self, _t: f64) -> f64 {
        self.0
    }

    fn bound(&self, _t0: f64, _t1: f64) -> f64 {
        self.0.abs()
    }
}

/// Right-continuous step function: `values[i]` on `[starts[i], starts[i+1])`,
/// with the first value extended to the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDrive {
    starts: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseDrive {
    /// `pieces` are `(start, value)` pairs with increasing starts.
    pub fn new(pieces: &[(f64, f64)]) -> Option<Self> {
        if pieces.is_empty() || pieces.windows(2).any(|w| w[1].0 <= w[0].0) {
            return None;
        }
        Some(Self {
            starts: pieces.iter().map(|p| p.0).collect(),
            values: pieces.iter().map(|p| p.1).collect(),
        })
    }

    fn index(&self, t: f64) -> usize {
        self.starts.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// Times in `(t0, t1)` where the value changes.
    pub fn breaks_in(&self, t0: f64, t1: f64) -> impl Iterator<Item = f64> + '_ {
        self.starts.iter().copied().filter(move |&s| s > t0 && s < t1)
    }
}

impl Drive for PiecewiseDrive {
    fn value(&self, t: f64) -> f64 {
        self.values[self.index(t)]
    }

    fn bound(&self, t0: f64, t1: f64) -> f64 {
        let (i, j) = (self.index(t0), self.index(t1));
        self.values[i..=j].iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Any function with a known Lipschitz constant.
pub struct LipschitzDrive<F> {
    f: F,
    lipschitz: f64,
}

impl<F: Fn(f64) -> f64 + Sync> LipschitzDrive<F> {
    pub fn new(f: F, lipschitz: f64) -> Self {
        Self { f, lipschitz }
    }
}

impl<F: Fn(f64) -> f64 + Sync> Drive for LipschitzDrive<F> {
    fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn bound(&self, t0: f64, t1: f64) -> f64 {
        let a = (self.f)(t0).abs();
        let b = (self.f)(t1).abs();
        // |g| on the interval is at most the tent over the two endpoints.
        0.5 * (a + b + self.lipschitz * (t1 - t0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_lookup_and_bound() {
        let g = PiecewiseDrive::new(&[(0.0, 3.0), (1.0, -5.0), (2.5, 1.0)]).unwrap();
        assert_eq!(g.value(-1.0), 3.0);
        assert_eq!(g.value(0.99), 3.0);
        assert_eq!(g.value(1.0), -5.0);
        assert_eq!(g.value(10.0), 1.0);
        assert_eq!(g.bound(0.0, 0.5), 3.0);
        assert_eq!(g.bound(0.5, 1.5), 5.0);
        assert_eq!(g.bound(3.0, 4.0), 1.0);
        assert!(PiecewiseDrive::new(&[(1.0, 0.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn lipschitz_bound_dominates() {
        let g = LipschitzDrive::new(|t: f64| 4.0 * (3.0 * t).sin(), 12.0);
        for i in 0..200 {
            let t0 = i as f64 * 0.05;
            let t1 = t0 + 0.3;
            let b = g.bound(t0, t1);
            for k in 0..=30 {
                let t = t0 + (t1 - t0) * k as f64 / 30.0;
                assert!(g.value(t).abs() <= b + 1e-12);
            }
        }
    }
}
