use criterion::{criterion_group, criterion_main, Criterion};
use ggc_core::budget::Mission;
use ggc_core::compensation::uniform_chi_grid;
use ggc_core::{ggc_residual_budget, integration_curve, propagate, shifts_sweep, solve_shifts, KinematicState, OrbitalPhase};
use nalgebra::Vector3;
use std::hint::black_box;

fn engine(c: &mut Criterion) {
    let mission = Mission::table1();
    let frame = mission.frame(OrbitalPhase::new(0.4));
    let pulses = mission.species[0].pulses();

    c.bench_function("propagate_40s", |b| {
        let s = KinematicState::new(Vector3::new(1e-3, 0.0, 2e-3), Vector3::new(1e-4, 0.0, -1e-4), 0.0);
        b.iter(|| propagate(&frame, black_box(&s), 40.0).unwrap())
    });
    c.bench_function("solve_shifts", |b| b.iter(|| solve_shifts(black_box(&frame), &pulses).unwrap()));
    c.bench_function("budget_ledger", |b| {
        b.iter(|| ggc_residual_budget(&mission, black_box(OrbitalPhase::new(0.4)), true).unwrap())
    });

    let mut slow = c.benchmark_group("mission");
    slow.sample_size(10);
    let grid = uniform_chi_grid(720);
    slow.bench_function("sweep_720", |b| b.iter(|| shifts_sweep(&frame, &pulses, black_box(&grid)).unwrap()));
    let mut short = mission.clone();
    short.chi_steps = 90;
    slow.bench_function("curve_1_week_90_phases", |b| {
        b.iter(|| integration_curve(black_box(&short), 7.0 * 86_400.0).unwrap())
    });
    slow.finish();
}

criterion_group!(benches, engine);
criterion_main!(benches);
