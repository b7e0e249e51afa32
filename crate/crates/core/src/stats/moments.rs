use serde::{Deserialize, Serialize};

use super::HittingSample;

/// `log(mean(exp(v)))`, computed stably.
pub fn log_mean_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = v.iter().map(|x| (x - m).exp()).sum();
    m + (s / v.len() as f64).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub theta: f64,
    pub estimate: f64,
    pub std_error: f64,
    /// The top 1% of the sample carries more than half the estimate.
    pub heavy_tail: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentScan {
    pub rows: Vec<MomentRow>,
    pub uncensored_fraction: f64,
    /// Fewer than 99% of values are uncensored.
    pub censoring_flag: bool,
}

pub(crate) fn moment_row(values: &[f64], theta: f64) -> MomentRow {
    let n = values.len();
    let scaled: Vec<f64> = values.iter().map(|v| theta * v).collect();
    let lme = log_mean_exp(&scaled);
    let estimate = lme.exp();
    // Work relative to the maximum so nothing overflows before the ratio.
    let m = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut terms: Vec<f64> = scaled.iter().map(|s| (s - m).exp()).collect();
    let total: f64 = terms.iter().sum();
    let mean = total / n as f64;
    let var = terms.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n.max(2) - 1) as f64;
    let std_error = (var / n as f64).sqrt() * m.exp();
    terms.sort_by(|a, b| b.total_cmp(a));
    let top = n.div_ceil(100);
    let heavy_tail = terms[..top].iter().sum::<f64>() > 0.5 * total;
    MomentRow {
        theta,
        estimate,
        std_error,
        heavy_tail,
    }
}

/// Monte Carlo `E exp(θ Z)` for each `θ`, with tail and censoring flags.
pub fn exponential_moment_scan(sample: &HittingSample, thetas: &[f64]) -> MomentScan {
    let uncensored_fraction = sample.uncensored_fraction();
    MomentScan {
        rows: if sample.is_empty() {
            vec![]
        } else {
            thetas.iter().map(|&t| moment_row(&sample.values, t)).collect()
        },
        uncensored_fraction,
        censoring_flag: uncensored_fraction < 0.99,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::replica_rng;
    use rand::Rng;
    use rand_distr::Exp1;

    fn sample(values: Vec<f64>) -> HittingSample {
        HittingSample {
            censored: vec![false; values.len()],
            values,
        }
    }

    #[test]
    fn constant_sample() {
        let s = sample(vec![1.5; 50]);
        let scan = exponential_moment_scan(&s, &[0.0, 0.7, 3.0]);
        for r in &scan.rows {
            assert!((r.estimate - (r.theta * 1.5).exp()).abs() < 1e-12 * r.estimate);
        }
        assert!(!scan.censoring_flag);
    }

    #[test]
    fn exponential_sample() {
        let mut rng = replica_rng(31, 0);
        let s = sample((0..100_000).map(|_| rng.sample::<f64, _>(Exp1)).collect());
        let scan = exponential_moment_scan(&s, &[0.5, 1.0]);
        let half = &scan.rows[0];
        assert!((half.estimate - 2.0).abs() < 3.0 * half.std_error, "{half:?}");
        assert!(!half.heavy_tail);
        assert!(scan.rows[1].heavy_tail);
    }

    #[test]
    fn huge_values_do_not_overflow() {
        let s = sample(vec![1000.0, 1001.0]);
        let r = &exponential_moment_scan(&s, &[1.0]).rows[0];
        assert!(r.estimate.is_infinite() || r.estimate > 0.0);
        assert!((log_mean_exp(&[1000.0, 1001.0]) - (1000.0 + ((1.0 + 1f64.exp()) / 2.0).ln())).abs() < 1e-12);
    }

    #[test]
    fn censoring_flag() {
        let mut s = sample(vec![1.0; 99]);
        s.values.push(5.0);
        s.censored.push(true);
        s.values.push(5.0);
        s.censored.push(true);
        assert!(exponential_moment_scan(&s, &[0.1]).censoring_flag);
    }
}
