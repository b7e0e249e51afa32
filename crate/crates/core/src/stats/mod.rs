//! Estimators turning sample paths into the quantities the theory bounds.

mod convergence;
mod doeblin;
mod dominance;
mod drift;
mod escape;
mod histogram;
mod hitting;
mod ks;
mod moments;
mod rate;

pub use convergence::{detect_convergence, PathPoint};
pub use doeblin::{doeblin_probe, DoeblinReport, StateBox};
pub use dominance::{dkw_tolerance, ecdf_dominance, Dominance, DominanceVerdict};
pub use drift::{lyapunov_drift_check, DriftReport, DriftRow, DriftScan};
pub use escape::{diffusion_escape_bound, estimate_escape, pdmp_escape_bound, wilson_interval, EscapeEstimate};
pub use histogram::{tv_distance, EmpiricalHistogram, HistogramAccumulator, HistogramSpec, StatsError};
pub use hitting::{hitting_time, HitOutcome, HittingSample};
pub use ks::ks_statistic;
pub use moments::{exponential_moment_scan, log_mean_exp, MomentRow, MomentScan};
pub use rate::{eta_schedule, fit_rate, RateFit};
