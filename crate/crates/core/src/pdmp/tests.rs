use super::*;
use crate::drive::{ConstantDrive, PiecewiseDrive};
use crate::seeding::replica_rng;
use crate::stats::ks_statistic;
use std::f64::consts::{FRAC_PI_2, TAU};

fn two_well() -> PeriodicPotential {
    PeriodicPotential::cosines(-0.2, &[(1, 1.0), (2, 1.0)]).unwrap()
}

#[test]
fn rate_examples() {
    let p = PeriodicPotential::cosine();
    assert_eq!(local_rate(&p, 1.0, &PdmpState::new(FRAC_PI_2, 3.0, 1.0)), 1.0);
    assert!((local_rate(&p, 1.0, &PdmpState::new(3.0 * FRAC_PI_2, 3.0, 1.0)) - 4.0).abs() < 1e-12);
    assert_eq!(local_rate(&two_well(), 0.7, &PdmpState::new(1.0, 0.0, -1.0)), 0.7);
}

#[test]
fn segment_examples() {
    let p = PeriodicPotential::cosine();
    for s in [0.0, 0.3, 2.0, 7.0] {
        assert!((segment_u(&p, 0.0, 1.0, s, 2.0) - (2.0 + s.sin())).abs() < 1e-14);
    }
    assert!((segment_u(&p, PI, 1.0, PI, 5.0) - 5.0).abs() < 1e-14);
    let q = two_well();
    assert!((segment_u(&q, 0.0, 1.0, TAU, 1.0) - (1.0 - 0.4 * PI)).abs() < 1e-13);
}

#[test]
fn invalid_rate_rejected() {
    let p = PeriodicPotential::cosine();
    assert!(PdmpModel::new(&p, -1.0).is_err());
    assert!(PdmpModel::new(&p, f64::NAN).is_err());
    assert!((PdmpModel::new(&p, 1.0).unwrap().window() - 0.5).abs() < 1e-12);
}

#[test]
fn path_invariants() {
    let p = two_well();
    let log = simulate_pdmp(
        &p,
        1.0,
        PdmpState::new(0.0, 30.0, 1.0),
        200.0,
        &mut replica_rng(4, 0),
        DEFAULT_MAX_EVENTS,
    )
    .unwrap();
    assert!(log.jumps() > 10);
    assert_eq!(log.events.last().unwrap().cause, Cause::HorizonEnd);
    assert!((log.horizon() - 200.0).abs() < 1e-9);
    for (seg, ev) in log.segments().zip(&log.events) {
        // Unit speed and exact u.
        // Durations are re-derived from event times, so allow rounding.
        assert!(crate::circle::distance(ev.state.x, seg.x0 + seg.y * seg.duration) < 1e-12);
        assert!((ev.state.u - segment_u(&p, seg.x0, seg.y, seg.duration, seg.u0)).abs() < 1e-10);
        match ev.cause {
            Cause::HorizonEnd => assert_eq!(ev.state.y, seg.y),
            _ => assert_eq!(ev.state.y, -seg.y),
        }
        if ev.cause == Cause::Landscape {
            // The flip happened where the landscape intensity was positive.
            assert!(seg.y * ev.state.u * p.slope(ev.state.x) > 0.0);
        }
    }
}

#[test]
fn no_consecutive_landscape_jumps_without_sign_change() {
    // After a landscape flip y u F' < 0; another landscape jump needs it to
    // turn positive again.
    let p = two_well();
    let log = simulate_pdmp(
        &p,
        0.5,
        PdmpState::new(1.0, 10.0, 1.0),
        300.0,
        &mut replica_rng(9, 1),
        DEFAULT_MAX_EVENTS,
    )
    .unwrap();
    let evs = &log.events;
    let mut pairs = 0;
    for (k, seg) in log.segments().enumerate().skip(1) {
        if evs[k - 1].cause == Cause::Landscape && evs[k].cause == Cause::Landscape {
            let start = seg.y * seg.u0 * p.slope(seg.x0);
            let end = seg.y * evs[k].state.u * p.slope(evs[k].state.x);
            assert!(start <= 0.0 && end > 0.0);
            pairs += 1;
        }
    }
    assert!(pairs > 0);
}

#[test]
fn deterministic_per_seed() {
    let p = two_well();
    let z0 = PdmpState::new(0.0, 3.0, -1.0);
    let a = simulate_pdmp(&p, 1.0, z0, 50.0, &mut replica_rng(1, 2), 1000).unwrap();
    let b = simulate_pdmp(&p, 1.0, z0, 50.0, &mut replica_rng(1, 2), 1000).unwrap();
    assert_eq!(a, b);
    let c = simulate_pdmp(&p, 1.0, z0, 50.0, &mut replica_rng(1, 3), 1000).unwrap();
    assert_ne!(a, c);
}

#[test]
fn event_cap() {
    let p = PeriodicPotential::cosine();
    let r = simulate_pdmp(
        &p,
        50.0,
        PdmpState::new(0.0, 0.0, 1.0),
        100.0,
        &mut replica_rng(0, 0),
        10,
    );
    assert!(matches!(r, Err(PdmpError::RunawayEvents { cap: 10, .. })));
}

#[test]
fn state_at_interpolates() {
    let p = two_well();
    let log = simulate_pdmp(
        &p,
        1.0,
        PdmpState::new(0.5, 1.0, 1.0),
        20.0,
        &mut replica_rng(3, 0),
        1000,
    )
    .unwrap();
    let s = log.state_at(&p, 20.0);
    assert_eq!(s, log.terminal());
    let s0 = log.state_at(&p, 0.0);
    assert!((s0.x - 0.5).abs() < 1e-15);
}

#[test]
fn driven_zero_is_telegraph() {
    let p = PeriodicPotential::cosine();
    let log = simulate_pdmp_driven(
        &p,
        2.0,
        &ConstantDrive(0.0),
        0.0,
        1.0,
        500.0,
        &mut replica_rng(2, 2),
        100_000,
    )
    .unwrap();
    assert!(log.events.iter().all(|e| e.cause != Cause::Landscape));
    // Mean holding time 1/λ.
    let mean = log.horizon() / log.jumps() as f64;
    assert!((mean - 0.5).abs() < 0.05, "{mean}");
}

#[test]
fn full_turn_before_first_jump() {
    // u = 0 and F' y <= 0 along the way would keep the landscape clock
    // silent; with g ≡ 0 only the constant clock runs, so the chance of
    // covering 2π first is e^{-2πλ}.
    let p = PeriodicPotential::cosine();
    let lambda = 0.1;
    let model = PdmpModel::new(&p, lambda).unwrap();
    let n = 20_000;
    let mut rng = replica_rng(77, 0);
    let hits = (0..n)
        .filter(|_| {
            model
                .sample_next_event_driven(&ConstantDrive(0.0), 0.0, 0.0, 1.0, &mut rng, TAU)
                .1
                == Cause::HorizonEnd
        })
        .count();
    let q = hits as f64 / n as f64;
    let expected = (-TAU * lambda).exp();
    assert!(
        (q - expected).abs() < 4.0 * (expected * (1.0 - expected) / n as f64).sqrt(),
        "{q} {expected}"
    );
}

#[test]
fn frozen_level_survival_closed_form() {
    let p = PeriodicPotential::cosine();
    let m = 4.0;
    let grid: Vec<f64> = (0..=100).map(|i| PI * i as f64 / 100.0).collect();
    let oracle = jump_time_cdf_oracle_driven(&p, 0.0, &ConstantDrive(m), 0.0, PI, 1.0, &grid);
    for (s, c) in grid.iter().zip(&oracle.cdf) {
        let exact = 1.0 - (-m * (1.0 - s.cos())).exp();
        assert!((c - exact).abs() < 1e-12);
    }
}

#[test]
fn oracle_axioms() {
    let p = two_well();
    let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
    let t = jump_time_cdf_oracle(&p, 0.3, 1.0, -1.0, 5.0, &grid);
    assert!(t.cdf.windows(2).all(|w| w[1] >= w[0]));
    assert!(*t.cdf.last().unwrap() > 0.99);
    let flat = jump_time_cdf_oracle_driven(&p, 1.5, &ConstantDrive(0.0), 0.0, 1.0, 1.0, &grid);
    for (s, c) in grid.iter().zip(&flat.cdf) {
        assert!((c - (1.0 - (-1.5 * s).exp())).abs() < 1e-12);
    }
}

fn ks_against(
    model: &PdmpModel,
    n: usize,
    seed: u64,
    draw: impl Fn(&PdmpModel, &mut SimRng) -> f64,
    table: &CdfTable,
) -> f64 {
    let mut rng = replica_rng(seed, 0);
    let sample: Vec<f64> = (0..n).map(|_| draw(model, &mut rng)).collect();
    ks_statistic(&sample, |s| table.eval(s))
}

#[test]
fn thinning_matches_oracle() {
    let p = PeriodicPotential::cosine();
    let model = PdmpModel::new(&p, 1.0).unwrap();
    let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.03).collect();

    let g = ConstantDrive(4.0);
    let table = jump_time_cdf_oracle_driven(&p, 1.0, &g, 0.0, PI, 1.0, &grid);
    let d = ks_against(
        &model,
        20_000,
        1,
        |m, r| m.sample_next_event_driven(&g, 0.0, PI, 1.0, r, f64::INFINITY).0,
        &table,
    );
    assert!(d < 0.02, "{d}");

    let g = PiecewiseDrive::new(&[(0.0, 3.0), (0.8, -2.0), (1.7, 5.0)]).unwrap();
    let table = jump_time_cdf_oracle_driven(&p, 1.0, &g, 0.0, 2.0, 1.0, &grid);
    let d = ks_against(
        &model,
        20_000,
        2,
        |m, r| m.sample_next_event_driven(&g, 0.0, 2.0, 1.0, r, f64::INFINITY).0,
        &table,
    );
    assert!(d < 0.02, "{d}");

    let q = two_well();
    let model = PdmpModel::new(&q, 0.5).unwrap();
    let table = jump_time_cdf_oracle(&q, 0.5, 0.4, 1.0, 6.0, &grid);
    let z = PdmpState::new(0.4, 6.0, 1.0);
    let d = ks_against(
        &model,
        20_000,
        3,
        |m, r| m.sample_next_event(&z, r, f64::INFINITY).0,
        &table,
    );
    assert!(d < 0.02, "{d}");
}

#[test]
fn walker_times_match_simulation() {
    let p = two_well();
    let model = PdmpModel::new(&p, 1.0).unwrap();
    let z0 = PdmpState::new(2.0, -3.0, 1.0);
    let log = simulate_pdmp(&p, 1.0, z0, 30.0, &mut replica_rng(6, 6), 10_000).unwrap();
    let mut w = PdmpWalker::new(&model, z0);
    let mut rng = replica_rng(6, 6);
    for e in &log.events {
        let sweep = w.advance(&mut rng, 30.0);
        assert!((sweep.t0 + sweep.duration - e.t).abs() < 1e-12);
        assert!(sweep.exact);
    }
    assert_eq!(w.state(), log.terminal());
}
