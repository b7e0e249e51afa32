use selfint::diffusion::{analytic_escape_probability, DrivenDiffusionWalker};
use selfint::pdmp::{segment_u, simulate_pdmp, PdmpModel, DEFAULT_MAX_EVENTS};
use selfint::quad::composite_simpson;
use selfint::stats::{hitting_time, wilson_interval, EmpiricalHistogram, HistogramSpec};
use selfint::{replica_rng, Arc, ConstantDrive, PdmpState, PeriodicPotential};
use std::f64::consts::PI;

#[test]
fn frozen_drift_exit_matches_scale_function() {
    let p = PeriodicPotential::cosine();
    let m = 2.0;
    let (home, rim, start) = (PI, (-1.0f64 / 3.0).acos(), 2.3);
    let exact = analytic_escape_probability(&p, m, home, start, rim)
        .unwrap()
        .reach_far_first;
    let g = ConstantDrive(m);
    let targets = [Arc::point(home), Arc::point(rim)];
    let n = 10_000u64;
    let mut hits = 0u64;
    for i in 0..n {
        let mut rng = replica_rng(17, i);
        let mut w = DrivenDiffusionWalker::new(&p, &g, start, 1e-4);
        let h = hitting_time(&mut w, &mut rng, &targets, 1e3);
        assert!(!h.censored);
        hits += u64::from(h.target == Some(1));
    }
    let (lo, hi) = wilson_interval(hits, n, 1.96);
    let half = 0.5 * (hi - lo);
    let est = hits as f64 / n as f64;
    assert!(
        (est - exact).abs() <= 3.0 * half,
        "simulated {est}, scale function {exact}, half-width {half}"
    );
}

#[test]
fn pdmp_u_is_the_integral_of_f_along_the_path() {
    let p = PeriodicPotential::cosines(0.1, &[(1, 1.0), (2, 0.5)]).unwrap();
    let z0 = PdmpState::new(0.4, 3.0, 1.0);
    let log = simulate_pdmp(&p, 1.5, z0, 60.0, &mut replica_rng(3, 0), DEFAULT_MAX_EVENTS).unwrap();
    assert!(log.jumps() > 10);
    let mut u = z0.u;
    for seg in log.segments() {
        u += composite_simpson(|r| p.value(seg.x0 + seg.y * r), 0.0, seg.duration, 4096);
        let exact = segment_u(&p, seg.x0, seg.y, seg.duration, seg.u0);
        assert!((u - exact).abs() < 1e-8, "{u} vs {exact}");
    }
    let end = log.terminal();
    assert!((end.u - u).abs() < 1e-8);
    assert_eq!(log.state_at(&p, log.horizon()), end);
}

#[test]
fn pdmp_occupation_carries_the_window_length() {
    let p = PeriodicPotential::cosine();
    let model = PdmpModel::new(&p, 1.0).unwrap();
    let mut segs = Vec::new();
    model
        .run(
            PdmpState::new(1.0, 0.0, -1.0),
            40.0,
            &mut replica_rng(8, 2),
            DEFAULT_MAX_EVENTS,
            |s| segs.push(*s),
        )
        .unwrap();
    let h = EmpiricalHistogram::from_segments(&p, &segs, HistogramSpec::default(), 5.0, 35.0).unwrap();
    assert!((h.weight - 30.0).abs() < 1e-9, "{}", h.weight);
    assert!((h.total_mass() - 1.0).abs() < 1e-12);
}
