use rand::Rng;
use serde_json::{json, Map, Value};

use super::config::{ProcessChoice, ScenarioConfig, ScenarioKind};
use super::files::Artifacts;
use super::replica::{fold_replicas, run_path, Dynamics, PathJob, PathResult};
use super::LabError;
use crate::circle::{distance, Arc};
use crate::diffusion::{evolve, step_count, DiffusionState, DiffusionWalker, DrivenDiffusionWalker};
use crate::drive::ConstantDrive;
use crate::landscape::{compute_delta, compute_level_geometry, landscape_of, CriticalLandscape, PeriodicPotential};
use crate::pdmp::{DrivenPdmpWalker, PdmpModel, PdmpState, PdmpWalker, DEFAULT_MAX_EVENTS};
use crate::seeding::{derive_replica_seed, replica_rng, SimRng};
use crate::stats::{
    detect_convergence, diffusion_escape_bound, doeblin_probe, estimate_escape, eta_schedule, exponential_moment_scan,
    fit_rate, hitting_time, lyapunov_drift_check, pdmp_escape_bound, tv_distance, EmpiricalHistogram,
    HistogramAccumulator, HistogramSpec, HittingSample, PathPoint, StateBox,
};

/// Replica streams are grouped in lanes: lane `k` of a run with root seed
/// `r` gives replica `i` the stream `replica_rng(derive_replica_seed(r, k), i)`.
#[derive(Debug, Clone)]
pub(crate) struct Lane {
    pub name: String,
    pub seed: u64,
    pub replicas: u64,
}

#[derive(Debug, Clone)]
pub(crate) struct Failure {
    pub lane: String,
    pub replica: u64,
    pub error: String,
}

#[derive(Debug, Default)]
pub(crate) struct ScenarioOutput {
    pub artifacts: Artifacts,
    pub estimates: Map<String, Value>,
    pub failures: Vec<Failure>,
    pub lanes: Vec<Lane>,
}

impl ScenarioOutput {
    pub fn attempted(&self) -> u64 {
        self.lanes.iter().map(|l| l.replicas).sum()
    }
}

const OVERLAY_LEVELS: u64 = 12;
const CURVE_POINTS: usize = 20;
const RATE_GRID: [u32; 6] = [1, 2, 3, 4, 5, 6];
const TV_CHECKPOINTS: u32 = 5;

pub(crate) fn execute(cfg: &ScenarioConfig) -> Result<ScenarioOutput, LabError> {
    let mut run = Run {
        cfg,
        p: &cfg.potential,
        out: ScenarioOutput::default(),
    };
    run.out.estimates.insert("kind".into(), json!(cfg.kind.as_str()));
    match cfg.kind {
        ScenarioKind::Ergodic => run.ergodic()?,
        ScenarioKind::Localization => run.localization()?,
        ScenarioKind::Metastability => run.metastability()?,
        ScenarioKind::PdmpVsDiffusion => run.diffusion_limit()?,
        ScenarioKind::Drift => run.drift()?,
        ScenarioKind::Doeblin => run.doeblin()?,
        ScenarioKind::Hitting => run.hitting()?,
        ScenarioKind::Single => run.single()?,
    }
    Ok(run.out)
}

struct Run<'a> {
    cfg: &'a ScenarioConfig,
    p: &'a PeriodicPotential,
    out: ScenarioOutput,
}

fn tv(a: &EmpiricalHistogram, b: &EmpiricalHistogram) -> f64 {
    tv_distance(a, b).expect("histograms share one spec")
}

fn finish(acc: HistogramAccumulator) -> Option<EmpiricalHistogram> {
    acc.finish().ok()
}

impl<'a> Run<'a> {
    fn lane(&mut self, name: impl Into<String>, replicas: u64) -> u64 {
        let seed = derive_replica_seed(self.cfg.seed, self.out.lanes.len() as u64);
        self.out.lanes.push(Lane {
            name: name.into(),
            seed,
            replicas,
        });
        seed
    }

    fn model(&self, lambda: f64) -> Result<PdmpModel<'a>, LabError> {
        PdmpModel::new(self.p, lambda).map_err(|e| LabError::Config(format!("lambda: {e}")))
    }

    fn landscape(&self) -> Result<CriticalLandscape, LabError> {
        Ok(landscape_of(self.p)?)
    }

    /// Runs `replicas` paths in one lane, writes the saved ones, records
    /// failures, and folds `digest` of each successful path in order.
    #[allow(clippy::too_many_arguments)]
    fn paths<T, A, D, G>(
        &mut self,
        lane: &str,
        dynamics: Dynamics<'_>,
        horizon: f64,
        grid: &[f64],
        windows: &[(f64, f64)],
        save: bool,
        digest: D,
        init: A,
        mut fold: G,
    ) -> A
    where
        T: Send,
        D: Fn(u64, PathResult) -> T + Sync,
        G: FnMut(A, u64, T) -> A,
    {
        let cfg = self.cfg;
        let n = cfg.replicas;
        let seed = self.lane(lane, n);
        let job = PathJob {
            p: self.p,
            horizon,
            grid,
            spec: HistogramSpec::default(),
            windows,
            save: false,
        };
        let mut saved = Vec::new();
        let mut failures = Vec::new();
        let acc = fold_replicas(
            n,
            |i| {
                let mut rng = replica_rng(seed, i);
                let z0 = cfg.init.sample(&mut rng);
                let job = PathJob {
                    save: save && i < cfg.save_paths,
                    ..job
                };
                run_path(dynamics, &job, z0, &mut rng).map(|mut r| (r.saved.take(), digest(i, r)))
            },
            init,
            |acc, i, r| match r {
                Ok((file, t)) => {
                    if let Some(text) = file {
                        saved.push((dynamics.path_file(i), text));
                    }
                    fold(acc, i, t)
                }
                Err(error) => {
                    failures.push(Failure {
                        lane: lane.to_string(),
                        replica: i,
                        error,
                    });
                    acc
                }
            },
        );
        for (name, text) in saved {
            self.out.artifacts.put(name, text);
        }
        self.out.failures.extend(failures);
        acc
    }

    fn processes(&self) -> Vec<&'static str> {
        match self.cfg.process {
            ProcessChoice::Diffusion => vec!["diffusion"],
            ProcessChoice::Pdmp => vec!["pdmp"],
            ProcessChoice::Both => vec!["diffusion", "pdmp"],
        }
    }

    fn dynamics<'m>(&self, name: &str, model: &'m PdmpModel<'m>) -> Dynamics<'m> {
        if name == "diffusion" {
            Dynamics::Diffusion {
                dt: self.cfg.dt,
                record_every: self.cfg.record_every,
            }
        } else {
            Dynamics::Pdmp { model }
        }
    }

    /// Occupation over `[burn_in, T]` and the laws at `T/2^k`.
    fn ergodic(&mut self) -> Result<(), LabError> {
        let h = self.cfg.horizon;
        let burn = self.cfg.burn_in.unwrap_or(0.1 * h);
        let mid = burn + 0.5 * (h - burn);
        let grid: Vec<f64> = (0..=TV_CHECKPOINTS).rev().map(|k| h / f64::from(1u32 << k)).collect();
        let windows = [(burn, h), (burn, mid), (mid, h)];
        let spec = HistogramSpec::default();
        let model = self.model(self.cfg.lambda.max(f64::MIN_POSITIVE))?;
        let mut plot = Vec::new();
        let mut report = Map::new();
        for name in self.processes() {
            let dynamics = self.dynamics(name, &model);
            struct Acc {
                laws: Vec<HistogramAccumulator>,
                pooled: HistogramAccumulator,
                first: Vec<EmpiricalHistogram>,
                halves: Option<(EmpiricalHistogram, EmpiricalHistogram)>,
            }
            let init = Acc {
                laws: grid.iter().map(|_| HistogramAccumulator::new(spec)).collect(),
                pooled: HistogramAccumulator::new(spec),
                first: Vec::new(),
                halves: None,
            };
            let acc = self.paths(
                name,
                dynamics,
                h,
                &grid,
                &windows,
                true,
                |_, r| r,
                init,
                |mut acc, _, r| {
                    for (law, s) in acc.laws.iter_mut().zip(&r.samples) {
                        law.add(s.1, s.2, 1.0, 1.0);
                    }
                    acc.pooled.absorb(&r.occupation[0]);
                    let mut occ = r.occupation.into_iter();
                    if acc.first.len() < 2 {
                        if let Some(full) = occ.next().and_then(finish) {
                            acc.first.push(full);
                        }
                        if acc.halves.is_none() {
                            if let (Some(a), Some(b)) = (occ.next().and_then(finish), occ.next().and_then(finish)) {
                                acc.halves = Some((a, b));
                            }
                        }
                    }
                    acc
                },
            );
            let laws: Vec<Option<EmpiricalHistogram>> = acc.laws.into_iter().map(finish).collect();
            let mut series = Vec::new();
            for k in 0..grid.len() - 1 {
                if let (Some(a), Some(b)) = (&laws[k], &laws[k + 1]) {
                    let d = tv(a, b);
                    plot.push(format!("{name},{},{d}", grid[k]));
                    series.push(json!({ "t": grid[k], "tv": d }));
                }
            }
            let replica_tv = (acc.first.len() == 2).then(|| tv(&acc.first[0], &acc.first[1]));
            let halves_tv = acc.halves.as_ref().map(|(a, b)| tv(a, b));
            let first_last = (series.first(), series.last());
            let decreasing = match first_last {
                (Some(a), Some(b)) => Some(b["tv"].as_f64() <= a["tv"].as_f64()),
                _ => None,
            };
            if let Some(pooled) = finish(acc.pooled) {
                self.out
                    .artifacts
                    .put(format!("plotdata_occupation_{name}.csv"), pooled.to_csv());
            }
            report.insert(
                name.into(),
                json!({
                    "burn_in": burn,
                    "tv_law_t_vs_2t": series,
                    "tv_decreasing": decreasing,
                    "tv_between_replicas": replica_tv,
                    "tv_between_halves": halves_tv,
                }),
            );
        }
        self.out.artifacts.table("plotdata_tv.csv", "process,t,tv", plot);
        self.out.estimates.insert("processes".into(), Value::Object(report));
        Ok(())
    }

    /// Which trap each replica settles on, with the shrinking-level overlay
    /// and the fitted convergence rate.
    fn localization(&mut self) -> Result<(), LabError> {
        let cfg = self.cfg;
        let l = self.landscape()?;
        let traps = l.traps();
        let h = cfg.horizon;
        let stride = cfg.record_every as f64 * cfg.dt;
        let n_grid = (h / stride).floor() as usize;
        let mut grid: Vec<f64> = (0..=n_grid).map(|k| k as f64 * stride).collect();
        if grid.last().is_some_and(|&t| t < h) {
            grid.push(h);
        }
        let window = (0.25 * h).min(100.0);
        let eps = cfg.eps;
        let curve_idx: Vec<usize> = (1..=CURVE_POINTS)
            .map(|k| (k * (grid.len() - 1)) / CURVE_POINTS)
            .collect();
        let overlay: Vec<(f64, Vec<(f64, Arc)>)> = traps.iter().map(|&x| (x, self.overlay_arcs(x))).collect();

        let model = self.model(cfg.lambda.max(f64::MIN_POSITIVE))?;
        let mut plot = Vec::new();
        let mut report = Map::new();
        report.insert("traps".into(), json!(traps));
        for name in self.processes() {
            let dynamics = self.dynamics(name, &model);
            struct Digest {
                converged: Option<f64>,
                near: Vec<bool>,
                terminal: PathPoint,
                /// Trap of reference and the distance to it at each curve point.
                distances: Option<(usize, Vec<f64>)>,
                stays: Vec<bool>,
            }
            let digest = |_, r: PathResult| {
                let converged = detect_convergence(&r.samples, &l, window, eps);
                let near_any = |x: f64| traps.iter().any(|&tr| distance(x, tr) < eps);
                let near = curve_idx
                    .iter()
                    .map(|&k| r.samples.get(k).is_some_and(|s| near_any(s.1)))
                    .collect();
                let home = converged.and_then(|c| traps.iter().position(|&t| t == c));
                let distances = home.map(|k| {
                    (
                        k,
                        curve_idx.iter().map(|&i| distance(r.samples[i].1, traps[k])).collect(),
                    )
                });
                let stays = home.map_or_else(Vec::new, |k| {
                    overlay[k]
                        .1
                        .iter()
                        .enumerate()
                        .map(|(j, (_, arc))| stays_after_entry(&r.samples, arc, j + 1))
                        .collect()
                });
                Digest {
                    converged,
                    near,
                    terminal: r.terminal,
                    distances,
                    stays,
                }
            };
            let digests = self.paths(
                name,
                dynamics,
                h,
                &grid,
                &[],
                true,
                digest,
                Vec::new(),
                |mut v, _, d| {
                    v.push(d);
                    v
                },
            );
            let n = digests.len().max(1) as f64;
            let per_trap: Vec<Value> = traps
                .iter()
                .map(|&t| {
                    let c = digests.iter().filter(|d| d.converged == Some(t)).count();
                    let near = digests.iter().filter(|d| distance(d.terminal.1, t) < eps).count();
                    json!({ "trap": t, "fraction_converged": c as f64 / n, "fraction_near_at_horizon": near as f64 / n })
                })
                .collect();
            let curve: Vec<Value> = curve_idx
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    let f = digests.iter().filter(|d| d.near[k]).count() as f64 / n;
                    plot.push(format!("{name},{},{f}", grid[i]));
                    json!({ "t": grid[i], "fraction_near": f })
                })
                .collect();
            let mut overlay_rows = Vec::new();
            let mut fits = Vec::new();
            for (k, (trap, arcs)) in overlay.iter().enumerate() {
                let mine: Vec<&Digest> = digests
                    .iter()
                    .filter(|d| d.distances.as_ref().is_some_and(|x| x.0 == k))
                    .collect();
                if mine.is_empty() {
                    continue;
                }
                for (j, (eta, _)) in arcs.iter().enumerate() {
                    let f = mine.iter().filter(|d| d.stays[j]).count() as f64 / mine.len() as f64;
                    overlay_rows.push(json!({ "trap": trap, "j": j + 1, "eta": eta, "fraction_staying": f }));
                }
                let series: Vec<(f64, f64)> = curve_idx
                    .iter()
                    .enumerate()
                    .map(|(c, &i)| {
                        let mut d: Vec<f64> = mine.iter().map(|m| m.distances.as_ref().unwrap().1[c]).collect();
                        d.sort_by(f64::total_cmp);
                        (grid[i], d[d.len() / 2])
                    })
                    .collect();
                fits.push(json!({ "trap": trap, "fit": fit_rate(&series, &RATE_GRID, 1e-6) }));
            }
            let any = digests.iter().filter(|d| d.converged.is_some()).count() as f64 / n;
            report.insert(
                name.into(),
                json!({
                    "replicas": digests.len(),
                    "window": window,
                    "eps": eps,
                    "fraction_converged": any,
                    "per_trap": per_trap,
                    "curve": curve,
                    "eta_overlay": overlay_rows,
                    "rate_fit": fits,
                }),
            );
        }
        self.out
            .artifacts
            .table("plotdata_localization.csv", "process,t,fraction_near", plot);
        self.out.estimates.insert("processes".into(), Value::Object(report));
        Ok(())
    }

    /// `(η_j, I^{η_j})` around a trap, taken in the potential for which the
    /// trap is a minimum. Levels whose geometry cannot be built are skipped.
    fn overlay_arcs(&self, trap: f64) -> Vec<(f64, Arc)> {
        let sign = self.p.value(trap).signum();
        let g = if sign < 0.0 { self.p.negated() } else { self.p.clone() };
        let Ok(lg) = landscape_of(&g) else { return Vec::new() };
        let Ok(delta) = compute_delta(&g, &lg) else {
            return Vec::new();
        };
        (1..=OVERLAY_LEVELS)
            .filter_map(|j| {
                let eta = eta_schedule(j, delta);
                let geo = compute_level_geometry(&g, &lg, delta, eta).ok()?;
                let m = geo.minima.iter().find(|m| distance(m.location, trap) < 1e-9)?;
                Some((eta, m.escape_arc))
            })
            .collect()
    }

    fn metastability(&mut self) -> Result<(), LabError> {
        let cfg = self.cfg;
        let p = self.p;
        let l = self.landscape()?;
        let delta = compute_delta(p, &l)?;
        let eta = cfg.eta.unwrap_or(delta);
        let geo = compute_level_geometry(p, &l, delta, eta)?;
        let slope_sup = p.sup_norm(1);
        let model = self.model(cfg.lambda.max(f64::MIN_POSITIVE))?;
        let mut rows = Vec::new();
        let mut plot = Vec::new();
        let mut monotone = Map::new();
        for name in self.processes() {
            let mut prev: Option<crate::stats::EscapeEstimate> = None;
            let mut ok = true;
            for &m in &cfg.drives {
                let drive = ConstantDrive(m);
                let seed = self.lane(format!("{name}-M{m}"), cfg.replicas);
                let est = if name == "diffusion" {
                    let bound = diffusion_escape_bound(m, slope_sup, eta);
                    estimate_escape(&geo, m, cfg.replicas, seed, cfg.horizon, Some(bound), |b, _| {
                        DrivenDiffusionWalker::new(p, &drive, b, cfg.dt)
                    })
                } else {
                    let bound = pdmp_escape_bound(cfg.lambda, eta, m);
                    estimate_escape(
                        &geo,
                        m,
                        cfg.replicas,
                        seed,
                        cfg.horizon,
                        Some(bound),
                        |b, rng: &mut SimRng| {
                            let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
                            DrivenPdmpWalker::new(&model, &drive, b, y)
                        },
                    )
                };
                if let Some(prev) = &prev {
                    ok &= est.estimate <= prev.estimate || est.overlaps(prev);
                }
                plot.push(format!(
                    "{name},{m},{},{},{},{},{}",
                    est.estimate,
                    est.interval.0,
                    est.interval.1,
                    est.estimate.ln(),
                    est.bound.unwrap_or(f64::NAN)
                ));
                rows.push(json!({ "process": name, "M": m, "estimate": est }));
                prev = Some(est);
            }
            monotone.insert(name.into(), json!(ok));
        }
        self.out.artifacts.table(
            "plotdata_metastability.csv",
            "process,M,q_hat,lo,hi,log_q_hat,bound",
            plot,
        );
        let e = &mut self.out.estimates;
        e.insert("delta".into(), json!(delta));
        e.insert("eta".into(), json!(eta));
        e.insert("kappa".into(), json!(geo.kappa));
        e.insert("rows".into(), json!(rows));
        e.insert("nonincreasing_in_M".into(), Value::Object(monotone));
        Ok(())
    }

    /// `x`-marginal occupation of the velocity-jump process over `λT`
    /// against the diffusion over `T`.
    fn diffusion_limit(&mut self) -> Result<(), LabError> {
        let cfg = self.cfg;
        let h = cfg.horizon;
        let spec = HistogramSpec::default();
        let pool = |acc: HistogramAccumulator, _, r: PathResult| {
            let mut acc = acc;
            acc.absorb(&r.occupation[0]);
            acc
        };
        let dummy = self.model(1.0)?;
        let diff = self.dynamics("diffusion", &dummy);
        let reference = self.paths(
            "diffusion",
            diff,
            h,
            &[],
            &[(0.0, h)],
            true,
            |_, r| r,
            HistogramAccumulator::new(spec),
            pool,
        );
        let reference = finish(reference)
            .ok_or_else(|| LabError::Runtime("every diffusion replica failed".into()))?
            .x_marginal();
        let mut rows = Vec::new();
        let mut plot = Vec::new();
        for (k, &lambda) in cfg.lambdas.iter().enumerate() {
            let model = self.model(lambda)?;
            let horizon = lambda * h;
            let acc = self.paths(
                &format!("pdmp-lambda{lambda}"),
                Dynamics::Pdmp { model: &model },
                horizon,
                &[],
                &[(0.0, horizon)],
                k == 0,
                |_, r| r,
                HistogramAccumulator::new(spec),
                pool,
            );
            let Some(hist) = finish(acc) else { continue };
            let d = 0.5
                * hist
                    .x_marginal()
                    .iter()
                    .zip(&reference)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>();
            plot.push(format!("{lambda},{d}"));
            rows.push(json!({ "lambda": lambda, "pdmp_horizon": horizon, "tv_x_marginal": d }));
        }
        let decreasing = rows
            .windows(2)
            .all(|w| w[1]["tv_x_marginal"].as_f64() <= w[0]["tv_x_marginal"].as_f64());
        self.out
            .artifacts
            .table("plotdata_diffusion_limit.csv", "lambda,tv", plot);
        self.out.estimates.insert("rows".into(), json!(rows));
        self.out
            .estimates
            .insert("tv_decreasing_in_lambda".into(), json!(decreasing));
        Ok(())
    }

    fn drift(&mut self) -> Result<(), LabError> {
        let cfg = self.cfg;
        let p = self.p;
        let ergodic = self.landscape()?.is_ergodic();
        let name = self.processes()[0];
        let seed = self.lane(
            format!("{name}-drift"),
            cfg.replicas * (cfg.u0s.len() * cfg.times.len()) as u64,
        );
        let model = self.model(cfg.lambda.max(f64::MIN_POSITIVE))?;
        let report = if name == "diffusion" {
            lyapunov_drift_check(
                cfg.kappa,
                &cfg.times,
                &cfg.u0s,
                cfg.replicas,
                seed,
                ergodic,
                |u0, t, rng| {
                    let (x0, _, _) = cfg.init.sample(rng);
                    evolve(
                        p,
                        DiffusionState::new(x0, u0),
                        cfg.dt,
                        step_count(t, cfg.dt),
                        rng,
                        |_, _| {},
                    )
                    .u
                },
            )
        } else {
            lyapunov_drift_check(
                cfg.kappa,
                &cfg.times,
                &cfg.u0s,
                cfg.replicas,
                seed,
                ergodic,
                |u0, t, rng| {
                    let (x0, _, y0) = cfg.init.sample(rng);
                    model
                        .run(PdmpState::new(x0, u0, y0), t, rng, DEFAULT_MAX_EVENTS, |_| {})
                        .map_or(f64::NAN, |s| s.u)
                },
            )
        };
        let plot = report.scans.iter().flat_map(|s| {
            s.rows
                .iter()
                .map(move |r| format!("{},{},{},{}", s.t, r.u0, r.ratio, r.ratio_se))
        });
        self.out
            .artifacts
            .table("plotdata_drift.csv", "t,u0,ratio,ratio_se", plot);
        self.out.estimates.insert("process".into(), json!(name));
        self.out.estimates.insert("passed".into(), json!(report.passed()));
        self.out.estimates.insert("report".into(), json!(report));
        Ok(())
    }

    fn doeblin(&mut self) -> Result<(), LabError> {
        let cfg = self.cfg;
        let p = self.p;
        let t = cfg.horizon;
        let b = cfg.target;
        let target = StateBox {
            arc: Arc::new(b.x_lo, b.x_hi - b.x_lo),
            u_lo: b.u_lo,
            u_hi: b.u_hi,
        };
        let model = self.model(cfg.lambda.max(f64::MIN_POSITIVE))?;
        let mut plot = Vec::new();
        let mut report = Map::new();
        for name in self.processes() {
            let seed = self.lane(format!("{name}-doeblin"), cfg.replicas * cfg.starts.len() as u64);
            let r = if name == "diffusion" {
                doeblin_probe(&cfg.starts, &target, cfg.replicas, seed, |(x, u), rng| {
                    let s = evolve(
                        p,
                        DiffusionState::new(x, u),
                        cfg.dt,
                        step_count(t, cfg.dt),
                        rng,
                        |_, _| {},
                    );
                    (s.x, s.u)
                })
            } else {
                doeblin_probe(&cfg.starts, &target, cfg.replicas, seed, |(x, u), rng| {
                    let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    model
                        .run(PdmpState::new(x, u, y), t, rng, DEFAULT_MAX_EVENTS, |_| {})
                        .map_or((f64::NAN, f64::NAN), |s| (s.x, s.u))
                })
            }
            .map_err(|e| LabError::Config(format!("doeblin: {e}")))?;
            for (z, e) in cfg.starts.iter().zip(&r.per_start) {
                plot.push(format!(
                    "{name},{},{},{},{},{}",
                    z.0, z.1, e.estimate, e.interval.0, e.interval.1
                ));
            }
            report.insert(name.into(), json!(r));
        }
        self.out
            .artifacts
            .table("plotdata_doeblin.csv", "process,x0,u0,estimate,lo,hi", plot);
        self.out.estimates.insert("processes".into(), Value::Object(report));
        Ok(())
    }

    fn hitting(&mut self) -> Result<(), LabError> {
        let cfg = self.cfg;
        let p = self.p;
        let targets: Vec<Arc> = cfg.arcs.iter().map(|&(s, len)| Arc::new(s, len)).collect();
        let model = self.model(cfg.lambda.max(f64::MIN_POSITIVE))?;
        let mut plot = Vec::new();
        let mut report = Map::new();
        for name in self.processes() {
            let seed = self.lane(format!("{name}-hitting"), cfg.replicas);
            let outcomes = fold_replicas(
                cfg.replicas,
                |i| {
                    let mut rng = replica_rng(seed, i);
                    let (x, u, y) = cfg.init.sample(&mut rng);
                    if name == "diffusion" {
                        let mut w = DiffusionWalker::new(p, DiffusionState::new(x, u), cfg.dt);
                        hitting_time(&mut w, &mut rng, &targets, cfg.horizon)
                    } else {
                        let mut w = PdmpWalker::new(&model, PdmpState::new(x, u, y));
                        hitting_time(&mut w, &mut rng, &targets, cfg.horizon)
                    }
                },
                Vec::new(),
                |mut v, _, h| {
                    v.push(h);
                    v
                },
            );
            let sample: HittingSample = outcomes.iter().copied().collect();
            for (i, h) in outcomes.iter().enumerate() {
                let target = h.target.map_or(String::new(), |k| k.to_string());
                plot.push(format!("{name},{i},{},{},{target}", h.time, h.censored));
            }
            report.insert(
                name.into(),
                json!({
                    "replicas": sample.len(),
                    "uncensored_fraction": sample.uncensored_fraction(),
                    "median": sample.median(),
                    "min": sample.min(),
                    "moments": exponential_moment_scan(&sample, &cfg.thetas),
                }),
            );
        }
        self.out
            .artifacts
            .table("plotdata_hitting.csv", "process,replica,time,censored,target", plot);
        self.out.estimates.insert("processes".into(), Value::Object(report));
        Ok(())
    }

    fn single(&mut self) -> Result<(), LabError> {
        let model = self.model(self.cfg.lambda.max(f64::MIN_POSITIVE))?;
        let mut report = Map::new();
        for name in self.processes() {
            let dynamics = self.dynamics(name, &model);
            let terminals = self.paths(
                name,
                dynamics,
                self.cfg.horizon,
                &[],
                &[],
                true,
                |_, r| r.terminal,
                Vec::new(),
                |mut v, _, t| {
                    v.push(json!({ "t": t.0, "x": t.1, "u": t.2 }));
                    v
                },
            );
            report.insert(name.into(), json!({ "terminal": terminals }));
        }
        self.out.estimates.insert("processes".into(), Value::Object(report));
        Ok(())
    }
}

/// Whether, after its `j`-th entry into `arc`, the sampled path stays in it
/// to the end. A path that starts inside counts that as its first entry.
fn stays_after_entry(samples: &[PathPoint], arc: &Arc, j: usize) -> bool {
    let mut entries = 0;
    let mut inside = false;
    let mut since = None;
    for (k, s) in samples.iter().enumerate() {
        let now = arc.contains(s.1);
        if now && !inside {
            entries += 1;
            if entries == j {
                since = Some(k);
            }
        }
        inside = now;
    }
    since.is_some_and(|k| samples[k..].iter().all(|s| arc.contains(s.1)))
}
