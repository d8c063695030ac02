use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dynglobal::harness::Mode;
use dynglobal_bench::Prepared;

const D: u32 = 12;

fn adopt_one(c: &mut Criterion) {
    let mut group = c.benchmark_group("adopt_one");
    for p in [2usize, 4, 6, 8, 10] {
        for mode in [Mode::Generic, Mode::Dynamic] {
            let mut prep = Prepared::new(mode, p, D);
            group.bench_with_input(BenchmarkId::new(mode.as_str(), p), &p, |b, _| {
                b.iter(|| prep.add_remove())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, adopt_one);
criterion_main!(benches);
