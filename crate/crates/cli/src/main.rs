use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use selfint::lab::{self, InitialLaw, InitialState, LabError, ProcessChoice, ScenarioConfig, ScenarioKind};
use selfint::PeriodicPotential;

const SCHEMA: &str = include_str!("../../../schemas/scenario.schema.json");

#[derive(Parser)]
#[command(
    name = "selfint",
    version,
    about = "Self-interacting diffusions and velocity-jump processes on the circle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical points, traps and level-set geometry of a potential, as JSON.
    Analyze {
        /// Potential file: flat `a0 ..` / `k a_k b_k` lines, or JSON.
        potential: PathBuf,
    },
    /// One path of one process.
    Simulate {
        #[arg(long, value_enum, default_value = "diffusion")]
        process: Process,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = selfint::diffusion::DEFAULT_DT)]
        dt: f64,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Potential file; `F = cos` when omitted.
        #[arg(long)]
        potential: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        u0: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long, default_value_t = selfint::diffusion::DEFAULT_RECORD_EVERY)]
        record_every: u64,
    },
    /// Runs a scenario file (TOML or JSON).
    Run {
        scenario: PathBuf,
        /// Overrides the `out` key of the scenario.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-runs the config in a manifest and compares file hashes.
    Replay {
        manifest: PathBuf,
        /// Defaults to `replay/` next to the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prints the scenario file schema.
    Schema,
}

#[derive(Clone, Copy, ValueEnum)]
enum Process {
    Diffusion,
    Pdmp,
}

fn load_potential(path: &Path) -> Result<PeriodicPotential, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    text.parse()
        .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn summary(out: &Path, m: &lab::RunManifest) {
    print_json(&serde_json::json!({
        "out": out,
        "kind": m.config.kind.as_str(),
        "config_hash": m.config_hash,
        "files": m.files.len(),
        "replicas": m.replicas_attempted,
        "wall_clock_seconds": m.wall_clock_seconds,
    }));
}

fn execute(cmd: Command) -> Result<(), LabError> {
    let workers = lab::workers_from_env()?;
    match cmd {
        Command::Analyze { potential } => {
            let p = load_potential(&potential)?;
            print_json(&selfint::landscape::analyze(&p));
            Ok(())
        }
        Command::Simulate {
            process,
            lambda,
            dt,
            horizon,
            seed,
            out,
            potential,
            x0,
            u0,
            y0,
            record_every,
        } => {
            let potential = match potential {
                Some(p) => load_potential(&p)?,
                None => PeriodicPotential::cosine(),
            };
            let cfg = ScenarioConfig {
                process: match process {
                    Process::Diffusion => ProcessChoice::Diffusion,
                    Process::Pdmp => ProcessChoice::Pdmp,
                },
                lambda,
                dt,
                horizon,
                seed,
                record_every,
                init: InitialState {
                    x0: InitialLaw::Fixed(x0),
                    u0: InitialLaw::Fixed(u0),
                    y0: InitialLaw::Fixed(y0),
                },
                save_paths: 1,
                ..single(potential)
            };
            let m = lab::run_scenario(&cfg, &out, workers)?;
            summary(&out, &m);
            Ok(())
        }
        Command::Run { scenario, out } => {
            let cfg = ScenarioConfig::load(&scenario)?;
            let out = out.or_else(|| cfg.out.clone()).ok_or_else(|| {
                LabError::Config("out: no output directory in the scenario or on the command line".into())
            })?;
            let m = lab::run_scenario(&cfg, &out, workers)?;
            summary(&out, &m);
            Ok(())
        }
        Command::Replay { manifest, out } => {
            let report = lab::replay(&manifest, out.as_deref(), workers)?;
            print_json(&report);
            if report.identical() {
                Ok(())
            } else {
                Err(LabError::Runtime(format!("{} file(s) differ", report.mismatches.len())))
            }
        }
        Command::Schema => {
            print!("{SCHEMA}");
            Ok(())
        }
    }
}

/// The defaults of a one-replica `single` run.
fn single(potential: PeriodicPotential) -> ScenarioConfig {
    let text = serde_json::json!({ "kind": "single", "potential": potential, "horizon": 1.0, "replicas": 1 });
    let mut cfg: ScenarioConfig = serde_json::from_value(text).expect("minimal config");
    cfg.kind = ScenarioKind::Single;
    cfg
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            eprintln!("\nScenario files follow this schema:\n{SCHEMA}");
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
