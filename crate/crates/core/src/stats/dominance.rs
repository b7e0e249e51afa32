use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominanceVerdict {
    /// Both orders hold within tolerance.
    Equivalent,
    ABelowB,
    BBelowA,
    Crossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dominance {
    /// `A ⪯ B`: `P(A > r) <= P(B > r)` for all `r`, i.e. `F_A >= F_B`.
    pub a_below_b: bool,
    pub b_below_a: bool,
}

impl Dominance {
    pub fn verdict(&self) -> DominanceVerdict {
        match (self.a_below_b, self.b_below_a) {
            (true, true) => DominanceVerdict::Equivalent,
            (true, false) => DominanceVerdict::ABelowB,
            (false, true) => DominanceVerdict::BBelowA,
            (false, false) => DominanceVerdict::Crossing,
        }
    }
}

/// Sum of the two DKW band half-widths at level `alpha`.
pub fn dkw_tolerance(n_a: usize, n_b: usize, alpha: f64) -> f64 {
    let eps = |n: usize| ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt();
    eps(n_a) + eps(n_b)
}

fn ecdf(sorted: &[f64], r: f64) -> f64 {
    sorted.partition_point(|&v| v <= r) as f64 / sorted.len() as f64
}

/// Compares empirical CDFs on the pooled sample points, allowing each
/// order to be violated by at most `tol`.
pub fn ecdf_dominance(a: &[f64], b: &[f64], tol: f64) -> Dominance {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let mut a_below_b = true;
    let mut b_below_a = true;
    for &r in sa.iter().chain(&sb) {
        let (fa, fb) = (ecdf(&sa, r), ecdf(&sb, r));
        a_below_b &= fa >= fb - tol;
        b_below_a &= fb >= fa - tol;
    }
    Dominance { a_below_b, b_below_a }
}
