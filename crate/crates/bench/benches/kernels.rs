use criterion::{criterion_group, criterion_main, Criterion};

use nikstar::counting::{check_counting, SystemShape};
use nikstar::limits::LimitTable;
use nikstar::measures::{load_preset, MeasureSet};
use nikstar::mop::{recurrence_sequence, MopSolver};
use nikstar::num::Cplx;
use nikstar::surface::solve_uniformization;

fn counting(c: &mut Criterion) {
    let shape = SystemShape::new(4).unwrap();
    c.bench_function("counting suite p=4", |b| b.iter(|| check_counting(&shape)));
}

fn recurrence(c: &mut Criterion) {
    let config = load_preset("cfg_a").unwrap();
    let set = MeasureSet::build(&config).unwrap();
    let shape = config.shape();
    let mut g = c.benchmark_group("recurrence");
    g.sample_size(10);
    g.bench_function("cfg_a a_n for n <= 30", |b| {
        b.iter(|| {
            let qs = MopSolver::new(&set, shape.degree(31)).sequence(31).unwrap();
            recurrence_sequence(&shape, &qs).unwrap()
        })
    });
    g.finish();
}

fn surface(c: &mut Criterion) {
    let config = load_preset("cfg_a").unwrap();
    let mut g = c.benchmark_group("surface");
    g.sample_size(10);
    g.bench_function("cfg_a uniformization", |b| b.iter(|| solve_uniformization(&config).unwrap()));
    let table = LimitTable::build(solve_uniformization(&config).unwrap()).unwrap();
    let z = Cplx::from_f64(table.prec(), 0.7, 1.3);
    g.bench_function("cfg_a F0 evaluation", |b| b.iter(|| table.f_tilde(0, 0, &z).unwrap()));
    g.finish();
}

criterion_group!(benches, counting, recurrence, surface);
criterion_main!(benches);
