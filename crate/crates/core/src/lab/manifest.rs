use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use super::config::ScenarioConfig;
use super::scenarios::execute;
use super::LabError;
use crate::seeding::derive_replica_seed;

/// Worker count for replica parallelism; unset means one per core.
pub const WORKERS_ENV: &str = "SELFINT_WORKERS";

/// A scenario fails when more than this share of its replicas fail.
const FAILURE_TOLERANCE: f64 = 0.01;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn workers_from_env() -> Result<Option<usize>, LabError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(LabError::Config(format!(
                "{WORKERS_ENV}: expected a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Seeds of one lane: replica `i` runs on `replica_rng(lane_seed, i)`, and
/// `lane_seed` is `derive_replica_seed(root, lane index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneSeeds {
    pub name: String,
    pub lane_seed: u64,
    pub replica_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub config_hash: String,
    pub root_seed: u64,
    pub lanes: Vec<LaneSeeds>,
    pub replicas_attempted: u64,
    pub replicas_failed: u64,
    pub workers: usize,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    /// File name to SHA-256 of its bytes; the manifest itself is not listed.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
        serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }
}

fn io(path: &Path, source: std::io::Error) -> LabError {
    LabError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// An output directory may be reused only by the config that filled it.
fn claim_output(dir: &Path, hash: &str) -> Result<(), LabError> {
    let refuse = |reason: String| LabError::OutputInUse {
        dir: dir.display().to_string(),
        reason,
    };
    if !dir.exists() {
        return fs::create_dir_all(dir).map_err(|e| io(dir, e));
    }
    let mut entries = fs::read_dir(dir).map_err(|e| io(dir, e))?;
    if entries.next().is_none() {
        return Ok(());
    }
    let manifest = dir.join("manifest.json");
    if !manifest.exists() {
        return Err(refuse("directory is not empty and holds no manifest".into()));
    }
    let previous = RunManifest::load(&manifest)?;
    if previous.config_hash != hash {
        return Err(refuse(format!(
            "it holds a run of a different config ({})",
            previous.config_hash
        )));
    }
    Ok(())
}

/// Runs the scenario into `out` on `workers` threads (all cores if `None`)
/// and writes the artifacts, `estimates.json` and `manifest.json`.
///
/// Replica failures above 1% are an error, returned after everything has
/// been written.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path, workers: Option<usize>) -> Result<RunManifest, LabError> {
    cfg.validate()?;
    let hash = cfg.hash();
    claim_output(out, &hash)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| LabError::Runtime(e.to_string()))?;
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let mut result = pool.install(|| execute(cfg))?;

    let attempted = result.attempted();
    let failed = result.failures.len() as u64;
    let mut estimates = std::mem::take(&mut result.estimates);
    estimates.insert("config_hash".into(), json!(hash));
    estimates.insert("replicas_attempted".into(), json!(attempted));
    estimates.insert(
        "failures".into(),
        json!(result
            .failures
            .iter()
            .map(|f| json!({ "lane": f.lane, "replica": f.replica, "error": f.error }))
            .collect::<Vec<_>>()),
    );
    let mut text = serde_json::to_string_pretty(&estimates).expect("estimates serialize");
    text.push('\n');
    result.artifacts.put("estimates.json", text);

    let mut files = BTreeMap::new();
    for (name, bytes) in &result.artifacts.files {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        files.insert(name.clone(), sha256_hex(bytes));
    }
    let mut echo = cfg.clone();
    echo.out = None;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: echo,
        config_hash: hash,
        root_seed: cfg.seed,
        lanes: result
            .lanes
            .iter()
            .map(|l| LaneSeeds {
                name: l.name.clone(),
                lane_seed: l.seed,
                replica_seeds: (0..l.replicas).map(|i| derive_replica_seed(l.seed, i)).collect(),
            })
            .collect(),
        replicas_attempted: attempted,
        replicas_failed: failed,
        workers: pool.current_num_threads(),
        started_unix,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        files,
    };
    let path = out.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| io(&path, e))?;

    if failed as f64 > FAILURE_TOLERANCE * attempted as f64 {
        return Err(LabError::ReplicaFailures {
            failed,
            total: attempted,
            first: result
                .failures
                .first()
                .map_or_else(String::new, |f| format!("{} #{}: {}", f.lane, f.replica, f.error)),
        });
    }
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub out: PathBuf,
    /// Files whose hash differs from the manifest, or that are missing on
    /// either side.
    pub mismatches: Vec<String>,
    pub version_changed: bool,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-runs the config recorded in a manifest into `out` (default: a
/// `replay` directory next to the manifest) and compares file hashes.
pub fn replay(manifest_path: &Path, out: Option<&Path>, workers: Option<usize>) -> Result<ReplayReport, LabError> {
    let recorded = RunManifest::load(manifest_path)?;
    recorded.config.validate()?;
    if recorded.config.hash() != recorded.config_hash {
        return Err(LabError::Config(format!(
            "{}: config does not match its recorded hash",
            manifest_path.display()
        )));
    }
    let out = match out {
        Some(o) => o.to_path_buf(),
        None => manifest_path.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    let fresh = match run_scenario(&recorded.config, &out, workers) {
        Ok(m) => m,
        Err(LabError::ReplicaFailures { .. }) => RunManifest::load(&out.join("manifest.json"))?,
        Err(e) => return Err(e),
    };
    let mut mismatches = Vec::new();
    for (name, h) in &recorded.files {
        match fresh.files.get(name) {
            Some(g) if g == h => {}
            Some(_) => mismatches.push(format!("{name}: hash differs")),
            None => mismatches.push(format!("{name}: not produced")),
        }
    }
    for name in fresh.files.keys().filter(|n| !recorded.files.contains_key(*n)) {
        mismatches.push(format!("{name}: not in the recorded manifest"));
    }
    Ok(ReplayReport {
        out,
        mismatches,
        version_changed: recorded.version != fresh.version,
    })
}
