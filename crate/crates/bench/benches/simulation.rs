use criterion::{black_box, criterion_group, criterion_main, Criterion};
use fic_bench::{contact, welded};
use fic_core::{compute_torque, run_simulation, ControllerState, ForceProfile};

fn profile(c: &mut Criterion) {
    let p = ForceProfile::with_stiffness(100.0).unwrap();
    let xs: Vec<f64> = (0..1000).map(|i| -0.3 + 0.6 * i as f64 / 999.0).collect();
    c.bench_function("force_1000", |b| b.iter(|| xs.iter().map(|&x| p.force(black_box(x))).sum::<f64>()));
    c.bench_function("energy_1000", |b| b.iter(|| xs.iter().map(|&x| p.energy(black_box(x))).sum::<f64>()));
    c.bench_function("compute_torque_1000", |b| {
        b.iter(|| {
            let mut st = ControllerState::default();
            let mut acc = 0.0;
            for (i, &x) in xs.iter().enumerate() {
                let v = if i % 200 < 100 { 1.0 } else { -1.0 };
                let (tq, next) = compute_torque(&st, &p, black_box(x), v);
                acc += tq;
                st = next;
            }
            acc
        })
    });
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_10s");
    g.sample_size(20);
    let w = welded(100.0, 5.0);
    g.bench_function("welded_k100", |b| b.iter(|| run_simulation(black_box(&w)).unwrap()));
    let k = contact(500.0, 0.0);
    g.bench_function("contact_kenv500_undamped", |b| b.iter(|| run_simulation(black_box(&k)).unwrap()));
    g.finish();
}

criterion_group!(benches, profile, simulation);
criterion_main!(benches);
