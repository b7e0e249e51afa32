use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use selfint::diffusion::{em_step, evolve};
use selfint::pdmp::{PdmpModel, DEFAULT_MAX_EVENTS};
use selfint::stats::{HistogramAccumulator, HistogramSpec};
use selfint::{replica_rng, DiffusionState, PdmpState, PeriodicPotential};
use std::hint::black_box;

fn two_well() -> PeriodicPotential {
    PeriodicPotential::cosines(-0.2, &[(1, 1.0), (2, 1.0)]).unwrap()
}

fn diffusion(c: &mut Criterion) {
    let p = two_well();
    c.bench_function("em_step", |b| {
        let mut s = DiffusionState::new(1.0, 3.0);
        b.iter(|| {
            s = em_step(&p, black_box(s), 1e-3, 0.3);
            s
        })
    });
    c.bench_function("evolve 10^4 steps", |b| {
        let mut rng = replica_rng(1, 0);
        b.iter(|| evolve(&p, DiffusionState::new(1.0, 3.0), 1e-3, 10_000, &mut rng, |_, _| {}))
    });
}

fn pdmp(c: &mut Criterion) {
    let p = two_well();
    let model = PdmpModel::new(&p, 1.0).unwrap();
    c.bench_function("sample_next_event", |b| {
        let mut rng = replica_rng(2, 0);
        let s = PdmpState::new(1.0, 20.0, 1.0);
        b.iter(|| model.sample_next_event(black_box(&s), &mut rng, f64::INFINITY))
    });
    c.bench_function("pdmp run to t = 100", |b| {
        let mut rng = replica_rng(3, 0);
        b.iter(|| {
            model.run(
                PdmpState::new(1.0, 20.0, 1.0),
                100.0,
                &mut rng,
                DEFAULT_MAX_EVENTS,
                |_| {},
            )
        })
    });
}

fn histogram(c: &mut Criterion) {
    let p = two_well();
    let model = PdmpModel::new(&p, 1.0).unwrap();
    let mut segs = Vec::new();
    model
        .run(
            PdmpState::new(1.0, 5.0, 1.0),
            200.0,
            &mut replica_rng(4, 0),
            DEFAULT_MAX_EVENTS,
            |s| segs.push(*s),
        )
        .unwrap();
    c.bench_function("add_segment (200 time units)", |b| {
        b.iter_batched(
            || HistogramAccumulator::new(HistogramSpec::default()),
            |mut acc| {
                for s in &segs {
                    acc.add_segment(&p, s, 0.0, s.duration);
                }
                acc
            },
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, diffusion, pdmp, histogram);
criterion_main!(benches);
