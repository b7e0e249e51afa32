use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{classify_landscape, find_critical_points, CriticalSearch, PeriodicPotential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn passed(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name && c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> AssumptionCheck {
    AssumptionCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Checks the standing hypotheses on `F`:
///
/// * `non-constant`
/// * `changes-sign`: `min F < 0 < max F`
/// * `nonzero-critical-values`
/// * `bracket-rank`: at every grid point some `F^(k)`, `1 <= k <= k_max`,
///   is away from zero; with the drift field `(1, 0)` the iterated brackets
///   `(-u F^(k+1), F^(k))` then span the plane
/// * `velocity-bracket-rank`: `F'` is not identically zero
pub fn validate_assumptions(p: &PeriodicPotential) -> AssumptionReport {
    let cfg = CriticalSearch::default();
    let mut checks = Vec::with_capacity(5);

    // Construction already rejects constants; keep the line in the report.
    let spread = p.coefficient_bound(0) - p.a0().abs();
    checks.push(check("non-constant", spread > 0.0, format!("harmonic mass {spread}")));

    let (lo, hi) = (p.min_value(), p.max_value());
    checks.push(check(
        "changes-sign",
        lo < 0.0 && hi > 0.0,
        format!("min F = {lo}, max F = {hi}"),
    ));

    let critical = find_critical_points(p, &cfg);
    let zero_values = match &critical {
        Ok(points) => match classify_landscape(points, &cfg) {
            Ok(_) => check(
                "nonzero-critical-values",
                true,
                format!("{} critical points", points.len()),
            ),
            Err(e) => check("nonzero-critical-values", false, e.to_string()),
        },
        Err(e) => check("nonzero-critical-values", false, e.to_string()),
    };
    checks.push(zero_values);

    let n = cfg.grid;
    let flat = (0..n)
        .map(|i| TAU * i as f64 / n as f64)
        .find(|&x| (1..=cfg.k_max).all(|k| p.derivative(x, k).abs() <= cfg.derivative_tol));
    let degenerate = critical.as_ref().err().map(|e| e.to_string());
    checks.push(match (flat, degenerate) {
        (Some(x), _) => check("bracket-rank", false, format!("all derivatives vanish at x = {x}")),
        (None, Some(e)) => check("bracket-rank", false, e),
        (None, None) => check("bracket-rank", true, format!("k_max = {}", cfg.k_max)),
    });

    let slope = p.sup_norm(1);
    checks.push(check(
        "velocity-bracket-rank",
        slope > cfg.derivative_tol,
        format!("sup |F'| = {slope}"),
    ));

    AssumptionReport { checks }
}
