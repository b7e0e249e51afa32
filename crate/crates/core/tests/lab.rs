use selfint::lab::{replay, run_scenario, LabError, ProcessChoice, RunManifest, ScenarioConfig, ScenarioKind};
use std::fs;
use std::path::{Path, PathBuf};

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn small(kind: &str, extra: &str) -> ScenarioConfig {
    let base = format!(
        r#"kind = "{kind}"
process = "both"
horizon = 20.0
replicas = 12
seed = 99
save_paths = 2
potential = {{ a0 = 0.0, harmonics = [[1, 1.0, 0.0]] }}"#
    );
    let key = |l: &str| l.split('=').next().unwrap_or("").trim().to_string();
    let overridden: Vec<String> = extra.lines().map(key).collect();
    let mut text: Vec<&str> = base.lines().filter(|l| !overridden.contains(&key(l))).collect();
    text.extend(extra.lines());
    ScenarioConfig::parse(&text.join("\n")).unwrap()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shipped_scenarios_parse() {
    let mut n = 0;
    for entry in fs::read_dir(scenario_dir()).unwrap() {
        let path = entry.unwrap().path();
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml" | "json") => {
                ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                n += 1;
            }
            Some("potential") => {
                fs::read_to_string(&path)
                    .unwrap()
                    .parse::<selfint::PeriodicPotential>()
                    .unwrap();
            }
            _ => {}
        }
    }
    assert!(n >= 7);
}

#[test]
fn ergodic_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small("ergodic", "burn_in = 2.0\nrecord_every = 10");
    let m = run_scenario(&cfg, dir.path(), Some(2)).unwrap();
    for name in [
        "estimates.json",
        "plotdata_tv.csv",
        "plotdata_occupation_diffusion.csv",
        "plotdata_occupation_pdmp.csv",
        "trajectory_0.csv",
        "trajectory_1.csv",
        "events_0.csv",
        "events_1.csv",
    ] {
        assert!(m.files.contains_key(name), "{name} missing");
        let bytes = fs::read(dir.path().join(name)).unwrap();
        assert_eq!(selfint::lab::sha256_hex(&bytes), m.files[name]);
    }
    assert!(!m.files.contains_key("trajectory_2.csv"));
    assert!(fs::read_to_string(dir.path().join("trajectory_0.csv"))
        .unwrap()
        .starts_with("t,x,u\n"));
    assert!(fs::read_to_string(dir.path().join("events_0.csv"))
        .unwrap()
        .starts_with("t,x,u,y,cause\n"));
    assert_eq!(m.lanes.len(), 2);
    assert_eq!(m.lanes[0].replica_seeds.len(), 12);
    let est = read_json(&dir.path().join("estimates.json"));
    assert!(est["processes"]["diffusion"]["tv_between_halves"].as_f64().is_some());
    assert_eq!(est["failures"].as_array().unwrap().len(), 0);
    let on_disk = RunManifest::load(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(on_disk.files, m.files);
}

#[test]
fn worker_count_does_not_change_outputs() {
    let cfg = small(
        "localization",
        "horizon = 40.0\npotential = { a0 = -0.2, harmonics = [[1, 1.0, 0.0], [2, 1.0, 0.0]] }\ninit.u0 = 5.0",
    );
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let one = run_scenario(&cfg, a.path(), Some(1)).unwrap();
    let eight = run_scenario(&cfg, b.path(), Some(8)).unwrap();
    assert_eq!(one.files, eight.files);
    assert_eq!((one.workers, eight.workers), (1, 8));
}

#[test]
fn replay_reproduces_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let cfg = small("single", "replicas = 3");
    run_scenario(&cfg, &run, None).unwrap();
    let report = replay(&run.join("manifest.json"), None, Some(3)).unwrap();
    assert!(report.identical(), "{:?}", report.mismatches);
    assert_eq!(report.out, run.join("replay"));

    // Tampering with an output is caught.
    let target = run.join("trajectory_0.csv");
    let mut text = fs::read_to_string(&target).unwrap();
    text.push_str("1,2,3\n");
    fs::write(&target, text).unwrap();
    let m = RunManifest::load(&run.join("manifest.json")).unwrap();
    let mut edited = m.clone();
    edited.files.insert(
        "trajectory_0.csv".into(),
        selfint::lab::sha256_hex(fs::read(&target).unwrap().as_slice()),
    );
    let forged = dir.path().join("forged.json");
    fs::write(&forged, serde_json::to_string(&edited).unwrap()).unwrap();
    let report = replay(&forged, Some(&dir.path().join("again")), None).unwrap();
    assert_eq!(report.mismatches, vec!["trajectory_0.csv: hash differs".to_string()]);
}

#[test]
fn reuse_of_an_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small("single", "replicas = 1");
    run_scenario(&cfg, dir.path(), None).unwrap();
    // Same config: allowed, and byte-identical.
    let before = fs::read(dir.path().join("trajectory_0.csv")).unwrap();
    run_scenario(&cfg, dir.path(), None).unwrap();
    assert_eq!(before, fs::read(dir.path().join("trajectory_0.csv")).unwrap());
    // Different config: refused.
    let mut other = cfg.clone();
    other.seed += 1;
    let err = run_scenario(&other, dir.path(), None).unwrap_err();
    assert!(matches!(err, LabError::OutputInUse { .. }), "{err}");
    assert_eq!(err.exit_code(), 1);
    // A stray file without a manifest: refused.
    let stray = tempfile::tempdir().unwrap();
    fs::write(stray.path().join("notes.txt"), "x").unwrap();
    assert!(matches!(
        run_scenario(&cfg, stray.path(), None),
        Err(LabError::OutputInUse { .. })
    ));
}

#[test]
fn metastability_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(
        "metastability",
        "replicas = 400\nlambda = 0.25\ndrives = [2.0, 16.0]\nhorizon = 200.0",
    );
    run_scenario(&cfg, dir.path(), None).unwrap();
    let est = read_json(&dir.path().join("estimates.json"));
    assert!((est["delta"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
    let rows = est["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let q = |k: usize| rows[k]["estimate"]["estimate"].as_f64().unwrap();
    assert!(q(1) < q(0) && q(3) < q(2), "{rows:?}");
    let plot = fs::read_to_string(dir.path().join("plotdata_metastability.csv")).unwrap();
    assert_eq!(plot.lines().count(), 5);
}

#[test]
fn remaining_kinds_run() {
    for (kind, extra) in [
        ("pdmp-vs-diffusion", "lambdas = [1.0, 4.0]\nhorizon = 10.0"),
        (
            "drift",
            "process = \"diffusion\"\ndt = 5e-3\nu0s = [5.0, 10.0]\ntimes = [5.0]\nreplicas = 200",
        ),
        (
            "drift",
            "process = \"pdmp\"\nu0s = [5.0, 10.0]\ntimes = [5.0]\nreplicas = 200",
        ),
        ("doeblin", "replicas = 100\nhorizon = 2.0"),
        ("hitting", "replicas = 50\ninit.x0 = 3.14159"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(kind, extra);
        let m = run_scenario(&cfg, dir.path(), None).unwrap_or_else(|e| panic!("{kind}: {e}"));
        assert!(
            m.files.keys().any(|f| f.starts_with("plotdata_")),
            "{kind}: {:?}",
            m.files.keys()
        );
        let est = read_json(&dir.path().join("estimates.json"));
        assert_eq!(est["kind"], kind);
    }
}

#[test]
fn drift_needs_one_process() {
    let text = r#"
kind = "drift"
horizon = 1.0
replicas = 1
potential = { a0 = 0.0, harmonics = [[1, 1.0, 0.0]] }
"#;
    let err = ScenarioConfig::parse(text).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("process"), "{err}");
    let cfg = ScenarioConfig::parse(&text.replace("kind = \"drift\"", "kind = \"drift\"\nprocess = \"pdmp\"")).unwrap();
    assert_eq!((cfg.kind, cfg.process), (ScenarioKind::Drift, ProcessChoice::Pdmp));
}

#[test]
fn schema_lists_every_config_key() {
    let schema = read_json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/scenario.schema.json"));
    let mut documented: Vec<String> = schema["properties"].as_object().unwrap().keys().cloned().collect();
    let mut cfg = small("hitting", "eta = 0.1\nburn_in = 1.0");
    cfg.out = Some("x".into());
    let mut actual: Vec<String> = serde_json::to_value(&cfg)
        .unwrap()
        .as_object()
        .unwrap()
        .keys()
        .cloned()
        .collect();
    documented.sort();
    actual.sort();
    assert_eq!(documented, actual);
}
