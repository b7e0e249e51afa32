use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{bisect, LandscapeError, PeriodicPotential};

/// Grid and tolerance settings for the critical-point search.
#[derive(Debug, Clone, Copy)]
pub struct CriticalSearch {
    /// Uniform bracketing grid size.
    pub grid: usize,
    /// A derivative counts as vanishing below this magnitude.
    pub derivative_tol: f64,
    /// Highest derivative order inspected when classifying a root of `F'`.
    pub k_max: u32,
    /// `|F|` at or below this at a critical point is a zero critical value.
    pub value_tol: f64,
}

impl Default for CriticalSearch {
    fn default() -> Self {
        CriticalSearch {
            grid: 4096,
            derivative_tol: 1e-8,
            k_max: 8,
            value_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumKind {
    LocalMax,
    LocalMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: f64,
    pub kind: ExtremumKind,
    pub value: f64,
    /// Smallest `k >= 2` with `F^{(k)}(x) != 0`.
    pub order: u32,
}

/// Critical points of `F`, split by kind and by the sign of `F` there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalLandscape {
    pub points: Vec<CriticalPoint>,
    /// Local maxima with `F > 0`.
    pub max_positive: Vec<f64>,
    /// Local maxima with `F < 0`.
    pub max_negative: Vec<f64>,
    /// Local minima with `F > 0`.
    pub min_positive: Vec<f64>,
    /// Local minima with `F < 0`.
    pub min_negative: Vec<f64>,
}

impl CriticalLandscape {
    /// All local minima.
    pub fn minima(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.min_positive.iter().chain(&self.min_negative).copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// The trap set: negative maxima and positive minima.
    pub fn traps(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.max_negative.iter().chain(&self.min_positive).copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn is_ergodic(&self) -> bool {
        self.max_negative.is_empty() && self.min_positive.is_empty()
    }

    pub fn point_at(&self, x: f64) -> Option<&CriticalPoint> {
        self.points
            .iter()
            .find(|p| crate::circle::distance(p.location, x) < 1e-9)
    }

    pub fn argmin(&self) -> &CriticalPoint {
        self.points
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("non-constant potential has extrema")
    }

    pub fn argmax(&self) -> &CriticalPoint {
        self.points
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .expect("non-constant potential has extrema")
    }
}

/// Locates the local extrema of `F` as sign changes of `F'` on a uniform
/// grid, polished by bisection to full double precision.
///
/// Each root is classified by its lowest non-vanishing derivative; if none
/// of orders `2..=k_max` is above tolerance the root is degenerate and the
/// search fails.
pub fn find_critical_points(p: &PeriodicPotential, cfg: &CriticalSearch) -> Result<Vec<CriticalPoint>, LandscapeError> {
    let n = cfg.grid.max(8);
    let h = TAU / n as f64;
    let slope = |x: f64| p.slope(x);
    let mut roots = Vec::new();
    let values: Vec<f64> = (0..n).map(|i| slope(i as f64 * h)).collect();
    for i in 0..n {
        let a = i as f64 * h;
        let fa = values[i];
        let fb = values[(i + 1) % n];
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(crate::circle::wrap(bisect(&slope, a, a + h, fa)));
        }
    }
    if roots.is_empty() {
        // A trigonometric polynomial with non-zero harmonics always has
        // extrema; reaching this means F' vanished identically on the grid.
        return Err(LandscapeError::DegenerateCriticalPoint { location: 0.0 });
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut points = Vec::with_capacity(roots.len());
    for x in roots {
        let order = (2..=cfg.k_max)
            .find(|&k| p.derivative(x, k).abs() > cfg.derivative_tol)
            .ok_or(LandscapeError::DegenerateCriticalPoint { location: x })?;
        let kind = if order % 2 == 0 {
            if p.derivative(x, order) < 0.0 {
                ExtremumKind::LocalMax
            } else {
                ExtremumKind::LocalMin
            }
        } else {
            // Odd order means no sign change in exact arithmetic; fall back
            // to what the grid saw on either side.
            let probe = 0.5 * h;
            if slope(x - probe) > slope(x + probe) {
                ExtremumKind::LocalMax
            } else {
                ExtremumKind::LocalMin
            }
        };
        points.push(CriticalPoint {
            location: x,
            kind,
            value: p.value(x),
            order,
        });
    }
    Ok(points)
}

/// Splits critical points into the four signed sets.
pub fn classify_landscape(points: &[CriticalPoint], cfg: &CriticalSearch) -> Result<CriticalLandscape, LandscapeError> {
    let mut out = CriticalLandscape {
        points: points.to_vec(),
        max_positive: vec![],
        max_negative: vec![],
        min_positive: vec![],
        min_negative: vec![],
    };
    for cp in points {
        if cp.value.abs() <= cfg.value_tol {
            return Err(LandscapeError::ZeroCriticalValue { location: cp.location });
        }
        let bucket = match (cp.kind, cp.value > 0.0) {
            (ExtremumKind::LocalMax, true) => &mut out.max_positive,
            (ExtremumKind::LocalMax, false) => &mut out.max_negative,
            (ExtremumKind::LocalMin, true) => &mut out.min_positive,
            (ExtremumKind::LocalMin, false) => &mut out.min_negative,
        };
        bucket.push(cp.location);
    }
    Ok(out)
}

/// Convenience: search and classify with default settings.
pub fn landscape_of(p: &PeriodicPotential) -> Result<CriticalLandscape, LandscapeError> {
    let cfg = CriticalSearch::default();
    classify_landscape(&find_critical_points(p, &cfg)?, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::Harmonic;
    use std::f64::consts::PI;

    fn two_well() -> PeriodicPotential {
        PeriodicPotential::cosines(-0.2, &[(1, 1.0), (2, 1.0)]).unwrap()
    }

    /// Roots of F'(x) = -sin x (1 + 4 cos x) in closed form.
    fn two_well_roots() -> [f64; 4] {
        let c = (-0.25f64).acos();
        [0.0, c, PI, TAU - c]
    }

    #[test]
    fn cosine_extrema() {
        let pts = find_critical_points(&PeriodicPotential::cosine(), &CriticalSearch::default()).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts[0].location.abs() < 1e-12);
        assert_eq!(pts[0].kind, ExtremumKind::LocalMax);
        assert_eq!(pts[0].order, 2);
        assert!((pts[1].location - PI).abs() < 1e-12);
        assert_eq!(pts[1].kind, ExtremumKind::LocalMin);
        assert!((pts[1].value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_well_roots_match_closed_form() {
        let pts = find_critical_points(&two_well(), &CriticalSearch::default()).unwrap();
        let expected = two_well_roots();
        assert_eq!(pts.len(), 4);
        for (p, e) in pts.iter().zip(expected) {
            assert!((p.location - e).abs() < 1e-10, "{} vs {}", p.location, e);
        }
        assert!((expected[1] - 1.8235).abs() < 1e-4);
        assert!((expected[3] - 4.4597).abs() < 1e-4);
    }

    #[test]
    fn classification_and_negation() {
        let l = landscape_of(&two_well()).unwrap();
        assert_eq!(l.max_positive.len(), 1);
        assert_eq!(l.max_negative.len(), 1);
        assert!((l.max_negative[0] - PI).abs() < 1e-10);
        assert_eq!(l.min_negative.len(), 2);
        assert!(l.min_positive.is_empty());
        assert_eq!(l.traps().len(), 1);
        let v = l.point_at(l.min_negative[0]).unwrap().value;
        assert!((v + 1.325).abs() < 1e-10);

        let neg = landscape_of(&two_well().negated()).unwrap();
        assert_eq!(neg.min_positive.len(), 1);
        assert!((neg.min_positive[0] - PI).abs() < 1e-10);
        assert!((neg.point_at(PI).unwrap().value - 0.2).abs() < 1e-12);
        assert_eq!(neg.max_positive.len(), l.min_negative.len());
        assert_eq!(neg.min_negative.len(), l.max_positive.len());
    }

    #[test]
    fn cosine_is_ergodic() {
        let l = landscape_of(&PeriodicPotential::cosine()).unwrap();
        assert!(l.is_ergodic());
        assert_eq!(l.max_positive.len(), 1);
        assert_eq!(l.min_negative.len(), 1);
    }

    #[test]
    fn zero_critical_value_rejected() {
        let p = PeriodicPotential::cosines(0.0, &[(1, 1.0), (2, 1.0)]).unwrap();
        let cfg = CriticalSearch::default();
        let pts = find_critical_points(&p, &cfg).unwrap();
        assert!(matches!(
            classify_landscape(&pts, &cfg),
            Err(LandscapeError::ZeroCriticalValue { .. })
        ));
    }

    #[test]
    fn flat_minimum_is_degenerate() {
        // (1 - cos x)^5 vanishes to order 10 at x = 0, beyond k_max = 8.
        // Expanded: (1/16)(126 - 210 cos x + 120 cos 2x - 45 cos 3x + 10 cos 4x - cos 5x).
        let c = |v: f64| v / 16.0;
        let p = PeriodicPotential::new(
            c(126.0),
            [(1, -210.0), (2, 120.0), (3, -45.0), (4, 10.0), (5, -1.0)].map(|(k, a)| Harmonic { k, a: c(a), b: 0.0 }),
        )
        .unwrap();
        assert!(p.value(0.0).abs() < 1e-12);
        assert!((p.value(PI) - 32.0).abs() < 1e-10);
        assert!(matches!(
            find_critical_points(&p, &CriticalSearch::default()),
            Err(LandscapeError::DegenerateCriticalPoint { .. })
        ));
        // With enough derivative headroom the same point is a minimum of order 10.
        let cfg = CriticalSearch {
            k_max: 12,
            ..Default::default()
        };
        let pts = find_critical_points(&p, &cfg).unwrap();
        assert_eq!(pts[0].kind, ExtremumKind::LocalMin);
        assert_eq!(pts[0].order, 10);
    }

    #[test]
    fn extrema_alternate_and_monotone_between() {
        for p in [
            two_well(),
            PeriodicPotential::cosine(),
            PeriodicPotential::cosines(0.1, &[(1, 0.3), (3, 1.0)]).unwrap(),
        ] {
            let pts = find_critical_points(&p, &CriticalSearch::default()).unwrap();
            for w in 0..pts.len() {
                let a = &pts[w];
                let b = &pts[(w + 1) % pts.len()];
                assert_ne!(a.kind, b.kind);
                let len = crate::circle::ccw(a.location, b.location);
                let mut prev = p.value(a.location);
                for i in 1..=1000 {
                    let v = p.value(a.location + len * i as f64 / 1000.0);
                    match a.kind {
                        ExtremumKind::LocalMax => assert!(v < prev + 1e-15),
                        ExtremumKind::LocalMin => assert!(v > prev - 1e-15),
                    }
                    prev = v;
                }
            }
        }
    }
}
