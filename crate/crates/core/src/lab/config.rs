use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use super::LabError;
use crate::landscape::PeriodicPotential;
use crate::seeding::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Ergodic,
    Localization,
    Metastability,
    PdmpVsDiffusion,
    Drift,
    Doeblin,
    Hitting,
    /// One path per process; what `simulate` writes.
    Single,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Ergodic => "ergodic",
            ScenarioKind::Localization => "localization",
            ScenarioKind::Metastability => "metastability",
            ScenarioKind::PdmpVsDiffusion => "pdmp-vs-diffusion",
            ScenarioKind::Drift => "drift",
            ScenarioKind::Doeblin => "doeblin",
            ScenarioKind::Hitting => "hitting",
            ScenarioKind::Single => "single",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessChoice {
    Diffusion,
    Pdmp,
    Both,
}

impl ProcessChoice {
    pub fn diffusion(self) -> bool {
        self != ProcessChoice::Pdmp
    }

    pub fn pdmp(self) -> bool {
        self != ProcessChoice::Diffusion
    }
}

/// A fixed value or `{ uniform = [lo, hi] }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialLaw {
    Fixed(f64),
    Uniform { uniform: (f64, f64) },
}

impl InitialLaw {
    pub fn sample(&self, rng: &mut SimRng) -> f64 {
        match *self {
            InitialLaw::Fixed(v) => v,
            InitialLaw::Uniform { uniform: (lo, hi) } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    fn valid(&self) -> bool {
        match *self {
            InitialLaw::Fixed(v) => v.is_finite(),
            InitialLaw::Uniform { uniform: (lo, hi) } => lo.is_finite() && hi.is_finite() && lo <= hi,
        }
    }
}

/// Initial state law. `y0` is reduced to its sign, with 0 read as +1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(default = "zero_law")]
    pub x0: InitialLaw,
    #[serde(default = "zero_law")]
    pub u0: InitialLaw,
    #[serde(default = "one_law")]
    pub y0: InitialLaw,
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            x0: zero_law(),
            u0: zero_law(),
            y0: one_law(),
        }
    }
}

impl InitialState {
    /// Draws `(x, u, y)`. Every draw is taken, fixed or not, so the stream
    /// position afterwards does not depend on the law.
    pub fn sample(&self, rng: &mut SimRng) -> (f64, f64, f64) {
        let x = self.x0.sample(rng);
        let u = self.u0.sample(rng);
        let y = self.y0.sample(rng);
        (x, u, if y < 0.0 { -1.0 } else { 1.0 })
    }
}

fn zero_law() -> InitialLaw {
    InitialLaw::Fixed(0.0)
}

fn one_law() -> InitialLaw {
    InitialLaw::Fixed(1.0)
}

/// `[x_lo, x_hi] × [u_lo, u_hi]`; the `x` range is taken counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub u_lo: f64,
    pub u_hi: f64,
}

/// Everything a run depends on. Kind-specific knobs all have defaults and
/// are ignored by the kinds that do not use them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub potential: PeriodicPotential,
    #[serde(default = "default_process")]
    pub process: ProcessChoice,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub horizon: f64,
    pub replicas: u64,
    #[serde(default)]
    pub init: InitialState,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; a command-line `--out` overrides it. Not part of
    /// the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Replicas whose full path is written out.
    #[serde(default = "default_save_paths")]
    pub save_paths: u64,
    /// Diffusion steps between recorded samples.
    #[serde(default = "default_record_every")]
    pub record_every: u64,

    /// ergodic: start of the occupation window.
    #[serde(default)]
    pub burn_in: Option<f64>,
    /// localization and hitting: distance counted as "at the target".
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// metastability: drive levels `M`.
    #[serde(default = "default_drives")]
    pub drives: Vec<f64>,
    /// metastability: level `η`; defaults to `δ`.
    #[serde(default)]
    pub eta: Option<f64>,
    /// pdmp-vs-diffusion: jump rates compared against the diffusion.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// drift: `κ`.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// drift: starting velocities.
    #[serde(default = "default_u0s")]
    pub u0s: Vec<f64>,
    /// drift: scanned times.
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    /// doeblin: starting states `[x, u]`.
    #[serde(default = "default_starts")]
    pub starts: Vec<(f64, f64)>,
    /// doeblin: target set.
    #[serde(default = "default_target_box")]
    pub target: BoxSpec,
    /// hitting: target arcs `[start, length]`.
    #[serde(default = "default_arcs")]
    pub arcs: Vec<(f64, f64)>,
    /// hitting: `θ` grid for the exponential moments.
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
}

fn default_process() -> ProcessChoice {
    ProcessChoice::Both
}
fn default_lambda() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    crate::diffusion::DEFAULT_DT
}
fn default_save_paths() -> u64 {
    8
}
fn default_record_every() -> u64 {
    crate::diffusion::DEFAULT_RECORD_EVERY
}
fn default_eps() -> f64 {
    0.15
}
fn default_drives() -> Vec<f64> {
    vec![4.0, 8.0, 12.0, 16.0]
}
fn default_lambdas() -> Vec<f64> {
    vec![1.0, 10.0, 100.0]
}
fn default_kappa() -> f64 {
    0.05
}
fn default_u0s() -> Vec<f64> {
    vec![20.0, 40.0, 60.0]
}
fn default_times() -> Vec<f64> {
    vec![50.0, 100.0, 200.0]
}
fn default_starts() -> Vec<(f64, f64)> {
    vec![(0.0, -2.0), (0.0, 2.0), (PI, -2.0), (PI, 2.0)]
}
fn default_target_box() -> BoxSpec {
    BoxSpec {
        x_lo: 0.0,
        x_hi: TAU,
        u_lo: -1.0,
        u_hi: 1.0,
    }
}
fn default_arcs() -> Vec<(f64, f64)> {
    vec![(PI - 0.1, 0.2)]
}
fn default_thetas() -> Vec<f64> {
    vec![0.01, 0.05, 0.1]
}

fn field(name: &str, message: impl Into<String>) -> LabError {
    LabError::Config(format!("{name}: {}", message.into()))
}

impl ScenarioConfig {
    /// Parses a JSON document (first non-blank character `{`) or the flat
    /// TOML form.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let cfg: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if self.replicas < 1 {
            return Err(field("replicas", "must be at least 1"));
        }
        if !pos(self.horizon) {
            return Err(field(
                "horizon",
                format!("must be positive and finite, got {}", self.horizon),
            ));
        }
        if self.process.diffusion() && !pos(self.dt) {
            return Err(field(
                "dt",
                format!("must be positive for the diffusion, got {}", self.dt),
            ));
        }
        if self.process.pdmp() && !pos(self.lambda) {
            return Err(field(
                "lambda",
                format!("must be positive for the velocity-jump process, got {}", self.lambda),
            ));
        }
        if self.record_every < 1 {
            return Err(field("record_every", "must be at least 1"));
        }
        for (name, law) in [
            ("init.x0", self.init.x0),
            ("init.u0", self.init.u0),
            ("init.y0", self.init.y0),
        ] {
            if !law.valid() {
                return Err(field(name, "needs finite values with lo <= hi"));
            }
        }
        if let Some(b) = self.burn_in {
            if !(b.is_finite() && b >= 0.0 && b < self.horizon) {
                return Err(field("burn_in", "must lie in [0, horizon)"));
            }
        }
        if !pos(self.eps) {
            return Err(field("eps", "must be positive"));
        }
        match self.kind {
            ScenarioKind::Metastability => {
                if self.drives.is_empty() || !self.drives.iter().all(|&m| pos(m)) {
                    return Err(field("drives", "needs at least one positive level"));
                }
                if let Some(eta) = self.eta {
                    if !pos(eta) {
                        return Err(field("eta", "must be positive"));
                    }
                }
            }
            ScenarioKind::PdmpVsDiffusion => {
                if self.lambdas.is_empty() || !self.lambdas.iter().all(|&l| pos(l)) {
                    return Err(field("lambdas", "needs at least one positive rate"));
                }
            }
            ScenarioKind::Drift => {
                if !pos(self.kappa) {
                    return Err(field("kappa", "must be positive"));
                }
                if self.u0s.is_empty() || !self.u0s.iter().all(|u| u.is_finite()) {
                    return Err(field("u0s", "needs at least one finite value"));
                }
                if self.times.is_empty() || !self.times.iter().all(|&t| pos(t)) {
                    return Err(field("times", "needs at least one positive time"));
                }
                if self.process == ProcessChoice::Both {
                    return Err(field("process", "drift runs one process at a time"));
                }
            }
            ScenarioKind::Doeblin => {
                let t = &self.target;
                if self.starts.is_empty() {
                    return Err(field("starts", "needs at least one state"));
                }
                if !(t.u_hi > t.u_lo && t.x_hi > t.x_lo && t.x_hi - t.x_lo <= TAU) {
                    return Err(field("target", "needs x_lo < x_hi <= x_lo + 2π and u_lo < u_hi"));
                }
            }
            ScenarioKind::Hitting if self.arcs.is_empty() || !self.arcs.iter().all(|a| a.1 >= 0.0 && a.1 < TAU) => {
                return Err(field("arcs", "needs at least one arc with length in [0, 2π)"));
            }
            _ => {}
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form without the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"
kind = "localization"
process = "both"
horizon = 50.0
replicas = 4
seed = 7
init.x0 = 0.0
init.u0 = 30.0
init.y0 = { uniform = [-1.0, 1.0] }
potential.a0 = -0.2
potential.harmonics = [[1, 1.0, 0.0], [2, 1.0, 0.0]]
"#;

    #[test]
    fn flat_and_json_agree() {
        let a = ScenarioConfig::parse(FLAT).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        let b = ScenarioConfig::parse(&json).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.save_paths, 8);
        assert_eq!(
            a.potential,
            PeriodicPotential::cosines(-0.2, &[(1, 1.0), (2, 1.0)]).unwrap()
        );
        assert_eq!(a.init.u0, InitialLaw::Fixed(30.0));
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = ScenarioConfig::parse(FLAT).unwrap();
        let mut b = a.clone();
        b.out = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn field_level_errors() {
        let e = ScenarioConfig::parse(&FLAT.replace("replicas = 4", "replicas = 0")).unwrap_err();
        assert!(e.to_string().contains("replicas"), "{e}");
        let e = ScenarioConfig::parse(&format!("{FLAT}\nlambda = -1.0\n")).unwrap_err();
        assert!(e.to_string().contains("lambda"), "{e}");
        let e = ScenarioConfig::parse(&format!("{FLAT}\nbogus = 1\n")).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = ScenarioConfig::parse(&FLAT.replace(
            "potential.harmonics = [[1, 1.0, 0.0], [2, 1.0, 0.0]]",
            "potential.harmonics = []",
        ))
        .unwrap_err();
        assert!(matches!(e, LabError::Config(_)), "{e}");
    }

    #[test]
    fn pdmp_only_ignores_dt() {
        let cfg = ScenarioConfig::parse(
            &FLAT
                .replace("\"both\"", "\"pdmp\"")
                .replace("seed = 7", "seed = 7\ndt = 0.0"),
        )
        .unwrap();
        assert_eq!(cfg.process, ProcessChoice::Pdmp);
        assert!(ScenarioConfig::parse(&FLAT.replace("seed = 7", "seed = 7\ndt = 0.0")).is_err());
    }
}
