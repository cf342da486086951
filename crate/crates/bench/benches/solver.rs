use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use slp_bench::{compiled, grid, inputs, params, state, stepper};
use slp_core::analysis::fit_exponential;
use slp_core::dynamics::{run_channel, RunOptions, SolverKind};
use slp_core::geometry::solve;
use slp_core::{builtin, BeamFrequencies};

fn step(c: &mut Criterion) {
    let p = params();
    let inp = inputs(&p);
    for (name, solver, n_z, dt) in [
        ("step/adiabatic/256", SolverKind::Adiabatic, 256, 1e-9),
        ("step/full/256", SolverKind::Full, 256, 1e-10),
    ] {
        let g = grid(&p, n_z, dt);
        let mut s = stepper(&p, &g, solver);
        let mut st = state(&g);
        c.bench_function(name, |b| {
            b.iter(|| s.step(black_box(&mut st), &inp, dt).unwrap());
        });
    }
}

fn channel_run(c: &mut Criterion) {
    let p = params();
    let sc = builtin("fig3-eit", &p).unwrap();
    let seq = compiled(&sc);
    let g = grid(&p, 256, 1e-9);
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    group.bench_function("fig3-eit/ch1", |b| {
        b.iter(|| {
            run_channel(
                &seq,
                &p.ensemble,
                &p.controls,
                1,
                &p.channels[0],
                &g,
                &RunOptions::default(),
            )
            .unwrap()
        });
    });
    group.finish();
}

fn analysis(c: &mut Criterion) {
    let p = params();
    let freqs = BeamFrequencies::from_constants(&p.constants, p.controls.delta);
    c.bench_function("phase_match", |b| {
        b.iter(|| {
            solve(
                black_box(&freqs),
                p.constants.c0,
                p.ensemble.length,
                p.bwc_tilt,
            )
            .unwrap()
        });
    });
    let pts: Vec<(f64, f64)> = (0..7)
        .map(|i| {
            let t = 0.8e-6 + 0.2e-6 * i as f64;
            (t, 0.9 * (-t / 1.22e-6f64).exp())
        })
        .collect();
    c.bench_function("fit_exponential", |b| {
        b.iter(|| fit_exponential(black_box(&pts)).unwrap())
    });
}

criterion_group!(benches, step, channel_run, analysis);
criterion_main!(benches);
