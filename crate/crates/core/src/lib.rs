//! Simulation of self-interacting diffusions and velocity-jump processes on
//! the circle, with the landscape analysis and estimators around them.

pub mod circle;
pub mod diffusion;
pub mod drive;
pub mod lab;
pub mod landscape;
pub mod path;
pub mod pdmp;
pub mod quad;
pub mod schedule;
pub mod seeding;
pub mod stats;

pub use circle::Arc;
pub use diffusion::{DiffusionState, Trajectory};
pub use drive::{ConstantDrive, Drive, LipschitzDrive, PiecewiseDrive};
pub use landscape::{CriticalLandscape, LandscapeError, LevelGeometry, PeriodicPotential};
pub use pdmp::{Cause, EventLog, PdmpModel, PdmpState};
pub use schedule::{ControlError, ControlSchedule};
pub use seeding::{derive_replica_seed, replica_rng, SimRng};
