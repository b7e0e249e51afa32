use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use thiserror::Error;

use crate::circle::wrap;
use crate::diffusion::Trajectory;
use crate::landscape::PeriodicPotential;
use crate::pdmp::Segment;

const U_REFINE: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("histograms have different bins")]
    BinMismatch,
    #[error("empty input")]
    Empty,
}

/// Uniform bins over `x ∈ [0, 2π)` and `u ∈ [u_lo, u_hi]`, with one
/// underflow and one overflow bin per `x` column, optionally split by the
/// sign of `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub n_x: usize,
    pub n_u: usize,
    pub u_lo: f64,
    pub u_hi: f64,
    pub split_y: bool,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        Self {
            n_x: 64,
            n_u: 40,
            u_lo: -12.0,
            u_hi: 12.0,
            split_y: false,
        }
    }
}

impl HistogramSpec {
    fn column(&self) -> usize {
        self.n_u + 2
    }

    fn layer(&self) -> usize {
        self.n_x * self.column()
    }

    pub fn len(&self) -> usize {
        self.layer() * if self.split_y { 2 } else { 1 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_bin(&self, x: f64) -> usize {
        ((wrap(x) / TAU * self.n_x as f64) as usize).min(self.n_x - 1)
    }

    /// 0 is underflow, `n_u + 1` overflow.
    pub fn u_bin(&self, u: f64) -> usize {
        if u < self.u_lo {
            0
        } else if u > self.u_hi {
            self.n_u + 1
        } else {
            let w = (self.u_hi - self.u_lo) / self.n_u as f64;
            1 + (((u - self.u_lo) / w) as usize).min(self.n_u - 1)
        }
    }

    pub fn index(&self, x: f64, u: f64, y: f64) -> usize {
        let layer = if self.split_y && y < 0.0 { self.layer() } else { 0 };
        layer + self.x_bin(x) * self.column() + self.u_bin(u)
    }

    pub fn x_width(&self) -> f64 {
        TAU / self.n_x as f64
    }
}

/// Raw (unnormalised) weights, turned into a histogram by [`finish`].
///
/// [`finish`]: HistogramAccumulator::finish
#[derive(Debug, Clone)]
pub struct HistogramAccumulator {
    spec: HistogramSpec,
    weights: Vec<f64>,
    total: f64,
}

impl HistogramAccumulator {
    pub fn new(spec: HistogramSpec) -> Self {
        Self {
            spec,
            weights: vec![0.0; spec.len()],
            total: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64, u: f64, y: f64, w: f64) {
        self.weights[self.spec.index(x, u, y)] += w;
        self.total += w;
    }

    /// Adds another accumulator's raw weights to this one.
    pub fn absorb(&mut self, other: &HistogramAccumulator) {
        assert_eq!(self.spec, other.spec, "absorbing a histogram with different bins");
        for (w, o) in self.weights.iter_mut().zip(&other.weights) {
            *w += o;
        }
        self.total += other.total;
    }

    /// Time-weighted occupation of one velocity-jump segment, restricted to
    /// elapsed times in `[from, to]` along it. The segment is cut at every
    /// `x` bin boundary and each piece is binned at its midpoint `u`; pieces
    /// whose ends fall in different `u` bins are cut further.
    pub fn add_segment(&mut self, p: &PeriodicPotential, seg: &Segment, from: f64, to: f64) {
        let (s_lo, s_hi) = (from.max(0.0), to.min(seg.duration));
        if s_hi <= s_lo {
            return;
        }
        let w = self.spec.x_width();
        let y = seg.y;
        let start = seg.x0 + y * s_lo;
        // Index of the x-bin being traversed, in unwrapped coordinates.
        let mut bin = if y > 0.0 {
            (start / w).floor()
        } else {
            (start / w).ceil() - 1.0
        };
        let u_at = |r: f64| seg.u0 + p.line_integral(seg.x0, y, r);
        let mut s = s_lo;
        while s < s_hi {
            let pos = seg.x0 + y * s;
            let boundary = if y > 0.0 { (bin + 1.0) * w } else { bin * w };
            let step = ((boundary - pos) * y).min(s_hi - s);
            bin += y;
            if step <= 0.0 {
                continue;
            }
            let (ua, ub) = (u_at(s), u_at(s + step));
            let parts = if self.spec.u_bin(ua) == self.spec.u_bin(ub) {
                1
            } else {
                U_REFINE
            };
            let h = step / parts as f64;
            for k in 0..parts {
                let r = s + (k as f64 + 0.5) * h;
                self.add(seg.x0 + y * r, u_at(r), y, h);
            }
            s += step;
        }
    }

    pub fn finish(self) -> Result<EmpiricalHistogram, StatsError> {
        if !(self.total > 0.0) {
            return Err(StatsError::Empty);
        }
        let masses = self.weights.iter().map(|w| w / self.total).collect();
        Ok(EmpiricalHistogram {
            spec: self.spec,
            masses,
            weight: self.total,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalHistogram {
    pub spec: HistogramSpec,
    /// Sums to one.
    pub masses: Vec<f64>,
    /// Total raw weight behind the masses (time, or sample count).
    pub weight: f64,
}

impl EmpiricalHistogram {
    /// Recorded states of a diffusion path with `t >= from`, equally weighted.
    pub fn from_trajectory(tr: &Trajectory, spec: HistogramSpec, from: f64, to: f64) -> Result<Self, StatsError> {
        let mut acc = HistogramAccumulator::new(spec);
        for (t, s) in tr.since(from) {
            if t <= to {
                acc.add(s.x, s.u, 1.0, 1.0);
            }
        }
        acc.finish()
    }

    /// Time-weighted occupation of velocity-jump segments over `[from, to]`.
    pub fn from_segments<'a>(
        p: &PeriodicPotential,
        segments: impl IntoIterator<Item = &'a Segment>,
        spec: HistogramSpec,
        from: f64,
        to: f64,
    ) -> Result<Self, StatsError> {
        let mut acc = HistogramAccumulator::new(spec);
        for seg in segments {
            acc.add_segment(p, seg, from - seg.t0, to - seg.t0);
        }
        acc.finish()
    }

    /// Weighted average: the histogram of the pooled input.
    pub fn merge(&self, other: &Self) -> Result<Self, StatsError> {
        if self.spec != other.spec {
            return Err(StatsError::BinMismatch);
        }
        let w = self.weight + other.weight;
        let (a, b) = (self.weight / w, other.weight / w);
        Ok(Self {
            spec: self.spec,
            masses: self
                .masses
                .iter()
                .zip(&other.masses)
                .map(|(p, q)| a * p + b * q)
                .collect(),
            weight: w,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Mass per `x` bin, summed over `u` and `y`.
    pub fn x_marginal(&self) -> Vec<f64> {
        let col = self.spec.n_u + 2;
        let mut out = vec![0.0; self.spec.n_x];
        for (i, m) in self.masses.iter().enumerate() {
            out[(i / col) % self.spec.n_x] += m;
        }
        out
    }

    /// CSV rows `layer,x_lo,x_hi,u_lo,u_hi,mass`; overflow bins use
    /// infinite edges.
    pub fn to_csv(&self) -> String {
        let s = &self.spec;
        let mut out = String::from("y,x_lo,x_hi,u_lo,u_hi,mass\n");
        let du = (s.u_hi - s.u_lo) / s.n_u as f64;
        for (i, m) in self.masses.iter().enumerate() {
            let layer = i / (s.n_x * (s.n_u + 2));
            let ix = (i / (s.n_u + 2)) % s.n_x;
            let iu = i % (s.n_u + 2);
            let (ulo, uhi) = match iu {
                0 => (f64::NEG_INFINITY, s.u_lo),
                k if k == s.n_u + 1 => (s.u_hi, f64::INFINITY),
                k => (s.u_lo + (k - 1) as f64 * du, s.u_lo + k as f64 * du),
            };
            let y = if !s.split_y {
                "all"
            } else if layer == 0 {
                "+1"
            } else {
                "-1"
            };
            let xw = s.x_width();
            let _ = writeln!(out, "{y},{},{},{ulo},{uhi},{m}", ix as f64 * xw, (ix + 1) as f64 * xw);
        }
        out
    }
}

/// Half the L¹ distance between masses on identical bins.
pub fn tv_distance(a: &EmpiricalHistogram, b: &EmpiricalHistogram) -> Result<f64, StatsError> {
    if a.spec != b.spec {
        return Err(StatsError::BinMismatch);
    }
    Ok(0.5 * a.masses.iter().zip(&b.masses).map(|(p, q)| (p - q).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdmp::Cause;
    use proptest::prelude::*;

    fn small() -> HistogramSpec {
        HistogramSpec {
            n_x: 8,
            n_u: 4,
            u_lo: -1.0,
            u_hi: 1.0,
            split_y: false,
        }
    }

    fn from_points(spec: HistogramSpec, pts: &[(f64, f64, f64)]) -> EmpiricalHistogram {
        let mut acc = HistogramAccumulator::new(spec);
        for &(x, u, w) in pts {
            acc.add(x, u, 1.0, w);
        }
        acc.finish().unwrap()
    }

    #[test]
    fn stationary_point_is_one_bin() {
        let h = from_points(small(), &[(1.0, 0.2, 1.0); 5]);
        assert_eq!(h.masses.iter().filter(|&&m| m > 0.0).count(), 1);
        assert!((h.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overflow_bins() {
        let s = small();
        assert_eq!(s.u_bin(-5.0), 0);
        assert_eq!(s.u_bin(5.0), 5);
        assert_eq!(s.u_bin(1.0), 4);
        assert_eq!(s.u_bin(-1.0), 1);
    }

    #[test]
    fn tv_examples() {
        let a = from_points(small(), &[(0.1, 0.0, 1.0), (3.0, 0.0, 1.0)]);
        let b = from_points(small(), &[(0.1, 0.0, 1.0)]);
        let c = from_points(small(), &[(5.0, 0.5, 1.0)]);
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert!((tv_distance(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        assert!((tv_distance(&b, &c).unwrap() - 1.0).abs() < 1e-15);
        let other = from_points(HistogramSpec { n_x: 4, ..small() }, &[(0.1, 0.0, 1.0)]);
        assert_eq!(tv_distance(&a, &other), Err(StatsError::BinMismatch));
    }

    #[test]
    fn merge_of_halves_is_average() {
        let a = from_points(small(), &[(0.1, 0.0, 1.0)]);
        let b = from_points(small(), &[(4.0, 0.0, 1.0)]);
        let m = a.merge(&b).unwrap();
        let both = from_points(small(), &[(0.1, 0.0, 1.0), (4.0, 0.0, 1.0)]);
        for (x, y) in m.masses.iter().zip(&both.masses) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn segment_split_matches_fine_sampling() {
        let p = PeriodicPotential::cosine();
        let seg = Segment {
            t0: 0.0,
            x0: 5.9,
            u0: 0.3,
            y: 1.0,
            duration: 9.0,
            cause: Cause::HorizonEnd,
        };
        let spec = HistogramSpec::default();
        let exact = EmpiricalHistogram::from_segments(&p, [&seg], spec, 0.0, 9.0).unwrap();
        let mut acc = HistogramAccumulator::new(spec);
        let n = 200_000;
        for i in 0..n {
            let s = (i as f64 + 0.5) * 9.0 / n as f64;
            acc.add(seg.x0 + s, seg.u0 + p.line_integral(seg.x0, 1.0, s), 1.0, 1.0);
        }
        let fine = acc.finish().unwrap();
        assert!(tv_distance(&exact, &fine).unwrap() < 0.01);
        assert!((exact.weight - 9.0).abs() < 1e-12);
        assert!((exact.total_mass() - 1.0).abs() < 1e-12);
        let neg = Segment { y: -1.0, ..seg };
        let h = EmpiricalHistogram::from_segments(&p, [&neg], spec, 2.0, 5.0).unwrap();
        assert!((h.weight - 3.0).abs() < 1e-12);
    }

    fn arb_hist() -> impl Strategy<Value = EmpiricalHistogram> {
        prop::collection::vec((0.0..TAU, -1.5f64..1.5, 0.01f64..3.0), 1..30).prop_map(|pts| from_points(small(), &pts))
    }

    proptest! {
        #[test]
        fn merge_is_a_monoid(a in arb_hist(), b in arb_hist(), c in arb_hist()) {
            let ab_c = a.merge(&b).unwrap().merge(&c).unwrap();
            let a_bc = a.merge(&b.merge(&c).unwrap()).unwrap();
            let ba = b.merge(&a).unwrap();
            let ab = a.merge(&b).unwrap();
            for i in 0..a.masses.len() {
                prop_assert!((ab_c.masses[i] - a_bc.masses[i]).abs() < 1e-12);
                prop_assert!((ab.masses[i] - ba.masses[i]).abs() < 1e-12);
            }
            prop_assert!((ab_c.total_mass() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn tv_is_a_metric(a in arb_hist(), b in arb_hist(), c in arb_hist()) {
            let ab = tv_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, tv_distance(&b, &a).unwrap());
            prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
            let ac = tv_distance(&a, &c).unwrap();
            let cb = tv_distance(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
        }
    }
}
