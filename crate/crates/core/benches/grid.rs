use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stieltjes_kit::classifier::{certify_class_with, ClassKind, GridConfig};
use stieltjes_kit::corpus::{Corpus, Profile};
use stieltjes_kit::stieltjes_repr::Repr;
use stieltjes_kit::Exec;

fn strategies() -> Vec<(&'static str, Exec)> {
    vec![
        ("sequential", Exec::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Exec::Parallel),
    ]
}

fn certify(c: &mut Criterion) {
    let mut corpus = Corpus::new(3, Profile { q_max: 6, atoms_max: 64, ..Profile::default() });
    let pair = loop {
        let p = corpus.pair();
        if p.q() == 6 && p.mu().atoms().len() > 32 {
            break p;
        }
    };
    let f = Repr::Pair(pair.clone()).evaluator();
    let mut group = c.benchmark_group("certify_s");
    for n in [64usize, 256, 1024] {
        let grid = GridConfig { n_upper: n, n_lower: n, n_gap: n / 2, ..GridConfig::default() };
        for (name, exec) in strategies() {
            group.bench_with_input(BenchmarkId::new(name, grid.len()), &grid, |b, g| {
                b.iter(|| certify_class_with(&f, pair.alpha(), ClassKind::S, g, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, certify);
criterion_main!(benches);
