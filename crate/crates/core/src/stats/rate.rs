use serde::{Deserialize, Serialize};

/// `min(4 ln(1 + j) / (1 + j), δ)`.
pub fn eta_schedule(j: u64, delta: f64) -> f64 {
    let n = 1.0 + j as f64;
    (4.0 * n.ln() / n).min(delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub n: u32,
    pub intercept: f64,
    /// Residual sum of squares for each `n` in the grid.
    pub residuals: Vec<(u32, f64)>,
}

/// Fits `log d = c + (1/n) log(ln t / t)` for each `n` in `grid` (free
/// intercept) and returns the best `n`. Distances are clipped at `floor`
/// before taking logs; `t` must exceed `e` so that `ln t / t < 1`.
pub fn fit_rate(series: &[(f64, f64)], grid: &[u32], floor: f64) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t > 1.0)
        .map(|&(t, d)| ((t.ln() / t).ln(), d.max(floor).ln()))
        .collect();
    if pts.len() < 2 || grid.is_empty() {
        return None;
    }
    let m = pts.len() as f64;
    let mut residuals = Vec::with_capacity(grid.len());
    let mut best: Option<(u32, f64, f64)> = None;
    for &n in grid {
        let k = 1.0 / n as f64;
        let c = pts.iter().map(|(l, y)| y - k * l).sum::<f64>() / m;
        let rss = pts.iter().map(|(l, y)| (y - c - k * l).powi(2)).sum::<f64>();
        residuals.push((n, rss));
        if best.is_none_or(|b| rss < b.1) {
            best = Some((n, rss, c));
        }
    }
    let (n, _, intercept) = best?;
    Some(RateFit {
        n,
        intercept,
        residuals,
    })
}
