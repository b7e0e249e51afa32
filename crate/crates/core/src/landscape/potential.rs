use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use super::LandscapeError;

/// One term `a cos(kx) + b sin(kx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub k: u32,
    pub a: f64,
    pub b: f64,
}

/// A trigonometric polynomial `F(x) = a0 + Σ (a_k cos kx + b_k sin kx)`.
///
/// Derivatives of every order are exact, and so are the line integrals the
/// velocity-jump process needs between events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRecord", into = "PotentialRecord")]
pub struct PeriodicPotential {
    a0: f64,
    /// Sorted by `k`, one entry per frequency.
    harmonics: Vec<Harmonic>,
    max_k: u32,
}

/// Serialized form: `{"a0": .., "harmonics": [[k, a_k, b_k], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialRecord {
    pub a0: f64,
    pub harmonics: Vec<(u32, f64, f64)>,
}

impl TryFrom<PotentialRecord> for PeriodicPotential {
    type Error = LandscapeError;
    fn try_from(r: PotentialRecord) -> Result<Self, Self::Error> {
        PeriodicPotential::new(r.a0, r.harmonics.into_iter().map(|(k, a, b)| Harmonic { k, a, b }))
    }
}

impl From<PeriodicPotential> for PotentialRecord {
    fn from(p: PeriodicPotential) -> Self {
        PotentialRecord {
            a0: p.a0,
            harmonics: p.harmonics.iter().map(|h| (h.k, h.a, h.b)).collect(),
        }
    }
}

impl PeriodicPotential {
    /// Builds a potential, merging repeated frequencies.
    ///
    /// Rejects `k = 0`, non-finite coefficients and potentials whose
    /// harmonics all vanish.
    pub fn new(a0: f64, harmonics: impl IntoIterator<Item = Harmonic>) -> Result<Self, LandscapeError> {
        if !a0.is_finite() {
            return Err(LandscapeError::InvalidCoefficient("a0".into()));
        }
        let mut hs: Vec<Harmonic> = Vec::new();
        for h in harmonics {
            if h.k == 0 {
                return Err(LandscapeError::InvalidCoefficient(
                    "harmonic frequency must be >= 1 (put constants in a0)".into(),
                ));
            }
            if !h.a.is_finite() || !h.b.is_finite() {
                return Err(LandscapeError::InvalidCoefficient(format!("harmonic k={}", h.k)));
            }
            match hs.iter_mut().find(|e| e.k == h.k) {
                Some(e) => {
                    e.a += h.a;
                    e.b += h.b;
                }
                None => hs.push(h),
            }
        }
        hs.retain(|h| h.a != 0.0 || h.b != 0.0);
        if hs.is_empty() {
            return Err(LandscapeError::Constant);
        }
        hs.sort_by_key(|h| h.k);
        let max_k = hs.last().map(|h| h.k).unwrap_or(0);
        Ok(PeriodicPotential {
            a0,
            harmonics: hs,
            max_k,
        })
    }

    /// `F(x) = cos x`.
    pub fn cosine() -> Self {
        Self::new(0.0, [Harmonic { k: 1, a: 1.0, b: 0.0 }]).expect("valid")
    }

    /// Builds `a0 + Σ c_k cos(kx)` from `(k, c_k)` pairs.
    pub fn cosines(a0: f64, terms: &[(u32, f64)]) -> Result<Self, LandscapeError> {
        Self::new(a0, terms.iter().map(|&(k, a)| Harmonic { k, a, b: 0.0 }))
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    /// The potential `-F`.
    pub fn negated(&self) -> Self {
        PeriodicPotential {
            a0: -self.a0,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic {
                    k: h.k,
                    a: -h.a,
                    b: -h.b,
                })
                .collect(),
            max_k: self.max_k,
        }
    }

    /// Calls `visit(k, cos kx, sin kx)` for each stored harmonic, generating
    /// the multiples by complex multiplication from a single `sin_cos`.
    #[inline]
    fn for_each_mode(&self, x: f64, mut visit: impl FnMut(&Harmonic, f64, f64)) {
        let (s1, c1) = x.sin_cos();
        let (mut ck, mut sk) = (c1, s1);
        let mut k = 1;
        for h in &self.harmonics {
            if h.k > 8 {
                // Jump directly for sparse high frequencies.
                let (s, c) = (h.k as f64 * x).sin_cos();
                visit(h, c, s);
                continue;
            }
            while k < h.k {
                let c = ck * c1 - sk * s1;
                sk = sk * c1 + ck * s1;
                ck = c;
                k += 1;
            }
            visit(h, ck, sk);
        }
    }

    /// `F(x)`.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let mut f = self.a0;
        self.for_each_mode(x, |h, c, s| f += h.a * c + h.b * s);
        f
    }

    /// `(F(x), F'(x))` from one pass.
    #[inline]
    pub fn value_and_slope(&self, x: f64) -> (f64, f64) {
        let mut f = self.a0;
        let mut df = 0.0;
        self.for_each_mode(x, |h, c, s| {
            f += h.a * c + h.b * s;
            df += h.k as f64 * (h.b * c - h.a * s);
        });
        (f, df)
    }

    #[inline]
    pub fn slope(&self, x: f64) -> f64 {
        self.value_and_slope(x).1
    }

    /// `F^{(order)}(x)`: each derivative multiplies a mode by `k` and
    /// rotates `(cos, sin)` by a quarter turn.
    pub fn derivative(&self, x: f64, order: u32) -> f64 {
        if order == 0 {
            return self.value(x);
        }
        let mut acc = 0.0;
        self.for_each_mode(x, |h, c, s| {
            let scale = (h.k as f64).powi(order as i32);
            let term = match order % 4 {
                0 => h.a * c + h.b * s,
                1 => h.b * c - h.a * s,
                2 => -h.a * c - h.b * s,
                _ => h.a * s - h.b * c,
            };
            acc += scale * term;
        });
        acc
    }

    /// `(F'(x), G(x))` where `G = Σ (a sin kx - b cos kx) / k` is the
    /// periodic part of an antiderivative of `F`.
    #[inline]
    pub fn slope_and_primitive(&self, x: f64) -> (f64, f64) {
        let mut df = 0.0;
        let mut g = 0.0;
        self.for_each_mode(x, |h, c, s| {
            let k = h.k as f64;
            df += k * (h.b * c - h.a * s);
            g += (h.a * s - h.b * c) / k;
        });
        (df, g)
    }

    /// `∫_0^s F(x0 + y r) dr` for a unit velocity `y = ±1`, in closed form.
    #[inline]
    pub fn line_integral(&self, x0: f64, y: f64, s: f64) -> f64 {
        let x1 = x0 + y * s;
        let mut acc = self.a0 * s;
        // Antiderivative G(x) = Σ (a sin kx - b cos kx) / k, and the integral is (G(x1) - G(x0)) / y.
        let mut g0 = 0.0;
        let mut g1 = 0.0;
        self.for_each_mode(x0, |h, c, sn| g0 += (h.a * sn - h.b * c) / h.k as f64);
        self.for_each_mode(x1, |h, c, sn| g1 += (h.a * sn - h.b * c) / h.k as f64);
        acc += (g1 - g0) * y;
        acc
    }

    /// Upper bound on `sup |F^{(order)}|` from the coefficients.
    pub fn coefficient_bound(&self, order: u32) -> f64 {
        let mut b = if order == 0 { self.a0.abs() } else { 0.0 };
        for h in &self.harmonics {
            b += (h.k as f64).powi(order as i32) * h.a.hypot(h.b);
        }
        b
    }

    /// `sup |F^{(order)}|` located by root finding on the next derivative.
    pub fn sup_norm(&self, order: u32) -> f64 {
        let (lo, hi) = self.range_of(order);
        lo.abs().max(hi.abs())
    }

    /// `(min, max)` of `F^{(order)}` over the circle.
    pub fn range_of(&self, order: u32) -> (f64, f64) {
        const N: usize = 4096;
        let h = TAU / N as f64;
        let g = |x: f64| self.derivative(x, order + 1);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut consider = |x: f64| {
            let v = self.derivative(x, order);
            lo = lo.min(v);
            hi = hi.max(v);
        };
        let mut prev = g(0.0);
        for i in 0..N {
            let a = i as f64 * h;
            let b = a + h;
            consider(a);
            let next = g(b);
            if prev * next < 0.0 {
                consider(super::bisect(&g, a, b, prev));
            }
            prev = next;
        }
        (lo, hi)
    }

    pub fn min_value(&self) -> f64 {
        self.range_of(0).0
    }

    pub fn max_value(&self) -> f64 {
        self.range_of(0).1
    }
}

impl fmt::Display for PeriodicPotential {
    /// The flat text form accepted by [`FromStr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "a0 {}", self.a0)?;
        for h in &self.harmonics {
            writeln!(f, "{} {} {}", h.k, h.a, h.b)?;
        }
        Ok(())
    }
}

impl FromStr for PeriodicPotential {
    type Err = LandscapeError;

    /// Parses either the JSON record or the flat text form:
    ///
    /// ```text
    /// # F(x) = cos x + cos 2x - 0.2
    /// a0 -0.2
    /// 1 1.0 0.0
    /// 2 1.0 0.0
    /// ```
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim_start();
        if trimmed.starts_with('{') {
            return serde_json::from_str(trimmed).map_err(|e| LandscapeError::Parse(e.to_string()));
        }
        let mut a0 = None;
        let mut hs = Vec::new();
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            let bad = || LandscapeError::Parse(format!("line {}: cannot parse `{}`", lineno + 1, line));
            if fields[0].eq_ignore_ascii_case("a0") {
                if fields.len() != 2 {
                    return Err(bad());
                }
                a0 = Some(fields[1].parse::<f64>().map_err(|_| bad())?);
            } else {
                if fields.len() != 3 {
                    return Err(bad());
                }
                let k = fields[0].parse::<u32>().map_err(|_| bad())?;
                let a = fields[1].parse::<f64>().map_err(|_| bad())?;
                let b = fields[2].parse::<f64>().map_err(|_| bad())?;
                hs.push(Harmonic { k, a, b });
            }
        }
        PeriodicPotential::new(a0.unwrap_or(0.0), hs)
    }
}
