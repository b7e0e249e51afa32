use serde::{Deserialize, Serialize};

use crate::circle::Arc;
use crate::path::PathWalker;
use crate::seeding::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitOutcome {
    /// Elapsed time from the walker's current time; `cap` when censored.
    pub time: f64,
    pub censored: bool,
    /// Index of the target touched first.
    pub target: Option<usize>,
}

/// First time the path touches any of `targets`, within `cap`.
///
/// Exact sweeps give the crossing time itself; for discretised paths the
/// hit is dated at the end of the step that crossed.
pub fn hitting_time<W: PathWalker>(w: &mut W, rng: &mut SimRng, targets: &[Arc], cap: f64) -> HitOutcome {
    let start = w.time();
    if let Some(i) = targets.iter().position(|a| a.contains(w.position())) {
        return HitOutcome {
            time: 0.0,
            censored: false,
            target: Some(i),
        };
    }
    let limit = start + cap;
    while w.time() < limit {
        let sw = w.advance(rng, limit);
        let first = targets
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.first_touch(sw.x0, sw.displacement).map(|d| (d, i)))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((d, i)) = first {
            let at = if sw.exact && sw.displacement != 0.0 {
                sw.t0 + sw.duration * d / sw.displacement.abs()
            } else {
                sw.t0 + sw.duration
            };
            return HitOutcome {
                time: at - start,
                censored: false,
                target: Some(i),
            };
        }
        if sw.duration <= 0.0 {
            break;
        }
    }
    HitOutcome {
        time: cap,
        censored: true,
        target: None,
    }
}

/// Hitting times, possibly right-censored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HittingSample {
    pub values: Vec<f64>,
    pub censored: Vec<bool>,
}

impl HittingSample {
    pub fn push(&mut self, h: &HitOutcome) {
        self.values.push(h.time);
        self.censored.push(h.censored);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn uncensored_fraction(&self) -> f64 {
        if self.censored.is_empty() {
            return 1.0;
        }
        self.censored.iter().filter(|c| !**c).count() as f64 / self.censored.len() as f64
    }

    pub fn median(&self) -> Option<f64> {
        if self.values.is_empty() {
            return None;
        }
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        Some(v[v.len() / 2])
    }

    pub fn min(&self) -> Option<f64> {
        self.values.iter().copied().min_by(f64::total_cmp)
    }
}

impl FromIterator<HitOutcome> for HittingSample {
    fn from_iter<I: IntoIterator<Item = HitOutcome>>(iter: I) -> Self {
        let mut s = Self::default();
        for h in iter {
            s.push(&h);
        }
        s
    }
}
